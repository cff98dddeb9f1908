#pragma once

#include <memory>

#include "foodanno/backend.hpp"

namespace foodanno::detail {

std::shared_ptr<Backend> load_onnx_sam_backend(const BackendId& id, const BackendOptions& options);

}  // namespace foodanno::detail
