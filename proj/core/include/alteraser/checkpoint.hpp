#pragma once

#include <string>

#include "alteraser/model.hpp"

namespace alteraser {

/// Binary model checkpoint, little-endian:
///   magic "ALTE", u32 version=1, u64 m/n/d,
///   P row-major f64, Q row-major f64, h f64,
///   u32-length-prefixed UTF-8 JSON hyperparameter blob.
/// The parameter arrays round-trip bitwise.
void save_checkpoint(const ModelState& model, const std::string& path);
ModelState load_checkpoint(const std::string& path);

}  // namespace alteraser
