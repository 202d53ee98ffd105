// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_NN_CHECKPOINT_HPP
#define CLAB_NN_CHECKPOINT_HPP

#include "clab/nn/tensor.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace clab::nn {

// Tensor container file, round-trips bit-exactly:
//   magic "CLAB" | u32 version | u32 tensor count
//   per tensor: u32 name length | UTF-8 name | u32 rank | u64 dims[rank]
//               | little-endian f64 payload (row-major)
inline constexpr std::uint32_t kCheckpointVersion = 1;

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

void save_tensor_file(const std::filesystem::path& path, const NamedTensors& tensors);
NamedTensors load_tensor_file(const std::filesystem::path& path);

} // namespace clab::nn

#endif // CLAB_NN_CHECKPOINT_HPP
