// Versioned binary model containers. Round trips are bitwise lossless for
// every scalar; files are not portable across endianness (doubles and sizes
// are stored in host byte order behind a magic/version string).

#pragma once

#include <string>

#include "corrtensor/corr_tensor.hpp"
#include "corrtensor/decomp2d.hpp"

namespace corrtensor {

inline constexpr char kModel2DMagic[] = "CORR2DSVD/1\n";
inline constexpr char kModelTensorMagic[] = "CORRTENSOR/1\n";

void save_model(const Decomp2DModel& model, const std::string& path);
Decomp2DModel load_model(const std::string& path);

void save_tensor_model(const TensorModel& model, const std::string& path);
TensorModel load_tensor_model(const std::string& path);

}  // namespace corrtensor
