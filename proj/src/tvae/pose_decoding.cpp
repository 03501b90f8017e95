#include "a2m/tvae/pose_decoding.hpp"

#include "a2m/error.hpp"
#include "a2m/lie/so3.hpp"

namespace a2m::tvae {

using ad::Matrix;
using lie::Mat3;
using lie::Vec3;

namespace {

// Per-row chain rotations and joint positions of a root-pinned pose.
struct FkRow {
    std::vector<Mat3> rot;  // world rotation after each bone
    Eigen::Matrix3Xd joints;
};

FkRow fk_row(const lie::KinematicTree& tree, const Eigen::Ref<const Eigen::RowVectorXd>& w) {
    FkRow out;
    out.rot.resize(tree.bone_count());
    out.joints = Eigen::Matrix3Xd::Zero(3, tree.joint_count());
    int bone = 0;
    for (const auto& chain : tree.chains()) {
        Mat3 r = Mat3::Identity();
        for (std::size_t i = 1; i < chain.size(); ++i, ++bone) {
            r = r * lie::exp_so3(w.segment<3>(3 * bone).transpose()).matrix();
            out.rot[bone] = r;
            out.joints.col(chain[i]) = r.col(0) * tree.bone(bone).length + out.joints.col(chain[i - 1]);
        }
    }
    return out;
}

}  // namespace

Tensor fk_tensor(Tape& tape, const Tensor& lie_block, const lie::KinematicTree& tree) {
    const int n_bones = tree.bone_count();
    const int n_joints = tree.joint_count();
    if (lie_block.cols() != 3 * n_bones) {
        throw Error(ErrorKind::ShapeMismatch, "fk_tensor: expected " + std::to_string(3 * n_bones) +
                                                  " Lie values, got " + std::to_string(lie_block.cols()));
    }
    const Index batch = lie_block.rows();
    Matrix out(batch, 3 * n_joints);
    for (Index b = 0; b < batch; ++b) {
        const FkRow row = fk_row(tree, lie_block.value().row(b));
        out.row(b) = Eigen::Map<const Eigen::RowVectorXd>(row.joints.data(), row.joints.size());
    }
    return tape.record(std::move(out), {lie_block}, [lie_block, tree](const Matrix& g, ad::GradSink& sink) {
        const int nb = tree.bone_count();
        const int nj = tree.joint_count();
        const Matrix& w = lie_block.value();
        Matrix gw = Matrix::Zero(w.rows(), w.cols());
        for (Index b = 0; b < w.rows(); ++b) {
            const FkRow row = fk_row(tree, w.row(b));
            Eigen::Matrix3Xd gj(3, nj);
            for (int j = 0; j < nj; ++j) gj.col(j) = g.block<1, 3>(b, 3 * j).transpose();
            // Chains later in the list may start at joints of earlier chains, so
            // walking chains and bones in reverse completes every joint's
            // gradient before it is pushed to its parent.
            int bone = nb;
            const auto& chains = tree.chains();
            for (auto c = chains.rbegin(); c != chains.rend(); ++c) {
                const auto& chain = *c;
                Mat3 g_rot = Mat3::Zero();  // gradient w.r.t. the rotation after the current bone
                for (std::size_t i = chain.size() - 1; i >= 1; --i) {
                    --bone;
                    const double len = tree.bone(bone).length;
                    const Vec3 g_child = gj.col(chain[i]);
                    gj.col(chain[i - 1]) += g_child;
                    g_rot.col(0) += g_child * len;
                    const Mat3 r_prev = i > 1 ? row.rot[bone - 1] : Mat3::Identity();
                    const Vec3 wv = w.block<1, 3>(b, 3 * bone).transpose();
                    const Mat3 e = lie::exp_so3(wv).matrix();
                    const Mat3 g_e = r_prev.transpose() * g_rot;
                    const auto de = lie::exp_so3_derivatives(wv);
                    for (int k = 0; k < 3; ++k) gw(b, 3 * bone + k) = (g_e.array() * de[k].array()).sum();
                    g_rot = g_rot * e.transpose();
                }
            }
        }
        sink.add(0, gw);
    });
}

DecodedPose decode_pose_plain(Tape&, const Tensor& decoder_out, const Tensor& prev_root, int joints, int root) {
    if (decoder_out.cols() != 3 * joints) {
        throw Error(ErrorKind::ShapeMismatch, "plain decoder expects " + std::to_string(3 * joints) + " outputs");
    }
    DecodedPose d;
    d.joints = decoder_out;
    d.velocity = ad::slice(decoder_out, 3 * root, 3) - prev_root;
    return d;
}

DecodedPose decode_pose_lie(Tape& tape, const Tensor& decoder_out, const Tensor& prev_root,
                            const lie::KinematicTree& tree) {
    const int nb = tree.bone_count();
    if (decoder_out.cols() != 3 * nb + 3) {
        throw Error(ErrorKind::ShapeMismatch, "lie decoder expects " + std::to_string(3 * nb + 3) + " outputs");
    }
    DecodedPose d;
    d.lie = ad::slice(decoder_out, 0, 3 * nb);
    const Tensor root = ad::slice(decoder_out, 3 * nb, 3);
    d.offset = fk_tensor(tape, d.lie, tree);
    d.joints = d.offset + ad::tile_cols(root, tree.joint_count());
    d.velocity = root - prev_root;
    return d;
}

DecodedPose decode_pose_glmi(Tape& tape, const Tensor& decoder_out, const Tensor& prev_offset,
                             const Tensor& prev_root, const lie::KinematicTree& tree,
                             const VelocityModel& velocity) {
    const int nb = tree.bone_count();
    const int nj = tree.joint_count();
    if (decoder_out.cols() <= 3 * nb || prev_offset.cols() != 3 * nj || prev_root.cols() != 3) {
        throw Error(ErrorKind::ShapeMismatch, "glmi decoder inputs have inconsistent widths");
    }
    DecodedPose d;
    d.lie = ad::slice(decoder_out, 0, 3 * nb);
    d.h_o = ad::slice(decoder_out, 3 * nb, decoder_out.cols() - 3 * nb);
    d.offset = fk_tensor(tape, d.lie, tree);
    d.velocity = velocity(ad::concat({d.offset, prev_offset, d.h_o}));
    if (d.velocity.cols() != 3 || d.velocity.rows() != decoder_out.rows()) {
        throw Error(ErrorKind::ShapeMismatch, "velocity model must return B x 3");
    }
    d.joints = d.offset + ad::tile_cols(prev_root + d.velocity, nj);
    return d;
}

}  // namespace a2m::tvae
