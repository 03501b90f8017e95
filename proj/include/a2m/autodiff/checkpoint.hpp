#pragma once

#include <string>
#include <vector>

#include "a2m/autodiff/tape.hpp"

namespace a2m::ad {

// Binary layout (little endian): magic "A2MCKPT1", u32 version, u64 count,
// then per parameter u32 name length, name bytes, i64 rows, i64 cols and
// rows*cols doubles in column-major order.
void save_checkpoint(const std::string& path, const std::vector<const Parameter*>& params);

// Loads values into `params`, matched by name; every parameter must be
// present with the same shape.
void load_checkpoint(const std::string& path, const std::vector<Parameter*>& params);

std::vector<Parameter> read_checkpoint(const std::string& path);

}  // namespace a2m::ad
