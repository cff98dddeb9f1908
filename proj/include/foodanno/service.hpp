#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "foodanno/backend.hpp"
#include "foodanno/category.hpp"
#include "foodanno/error.hpp"

namespace foodanno {

inline constexpr char kVersion[] = "0.1.0";

struct ApiError {
  std::string code;  // stable identifier, e.g. "unsupported_exclude_point"
  std::string message;
  int http_status = 500;
};

// Frozen mapping from library errors to HTTP status codes.
int http_status_for(Errc code) noexcept;
ApiError to_api_error(const Error& error);

struct ServiceConfig {
  std::string bind_address = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  ModelManifest models;
  BackendOptions backend_options;
  std::filesystem::path output_root = ".";
  std::size_t max_upload_bytes = 32u << 20;
  std::chrono::seconds session_ttl{60 * 60};
  CategoryRegistry default_categories;
  std::optional<std::filesystem::path> static_dir;
};

// HTTP/JSON facade over annotation sessions. Requests to one session are
// applied one at a time in arrival order; distinct sessions run in parallel.
class AnnotationService {
 public:
  explicit AnnotationService(ServiceConfig config);
  ~AnnotationService();
  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Binds and serves on the calling thread until stop().
  bool run();
  void stop();

  std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace foodanno
