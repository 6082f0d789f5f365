/* Copyright 2026 The ambiprune Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef AMBIPRUNE_SERVICE_H_
#define AMBIPRUNE_SERVICE_H_

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "ambiprune/ambiguity.h"
#include "ambiprune/annotation.h"
#include "ambiprune/lru_cache.h"

namespace httplib {
class Server;
}

namespace ambiprune {

// Load-time snapshot behind the API. Never mutated after construction.
class SessionState {
 public:
  // Throws ValidationError unless every instance is scored.
  SessionState(Dataset dataset, std::optional<std::vector<Detection>> detections);

  const Dataset& dataset() const { return dataset_; }
  const std::optional<std::vector<Detection>>& detections() const {
    return detections_;
  }
  const std::vector<RankedInstance>& ranking() const { return ranking_; }
  std::optional<InstanceRef> find(std::string_view instance_id) const;

 private:
  Dataset dataset_;
  std::optional<std::vector<Detection>> detections_;
  std::vector<RankedInstance> ranking_;
  std::map<std::string, InstanceRef, std::less<>> by_id_;
};

struct ServiceOptions {
  std::string identity = "pedestrian";
  // Relative image paths resolve against this directory.
  std::filesystem::path image_root;
  std::size_t cache_capacity = 64;
  unsigned jobs = 1;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
  std::vector<std::pair<std::string, std::string>> headers;
};

using QueryParams = std::map<std::string, std::string, std::less<>>;

inline constexpr std::size_t kMaxHistogramBins = 200;
inline constexpr std::size_t kDefaultPageSize = 50;
inline constexpr std::size_t kMaxPageSize = 1000;

// Endpoint logic, independent of the HTTP transport. Every payload is built
// from the corresponding engine call on the snapshot.
class ApiService {
 public:
  // A null session answers 503 on every dataset endpoint.
  explicit ApiService(std::shared_ptr<const SessionState> session,
                      ServiceOptions options = {});

  ApiResponse healthz() const;
  // GET /dataset/summary
  ApiResponse dataset_summary() const;
  // GET /ambiguity/histogram?bins=N
  ApiResponse ambiguity_histogram(const QueryParams& query) const;
  // GET /instances?min_amb=&max_amb=&page=&page_size=
  ApiResponse instances(const QueryParams& query) const;
  // POST /whatif {"threshold", "subset", "iou", "conf"}
  ApiResponse whatif(std::string_view body) const;
  // GET /crops/{instance_id}
  ApiResponse crop(std::string_view instance_id) const;

  std::size_t cache_size() const { return cache_->size(); }

 private:
  using CacheKey = std::tuple<double, std::string, double, double>;

  std::shared_ptr<const SessionState> session_;
  ServiceOptions options_;
  std::unique_ptr<LruCache<CacheKey, std::string>> cache_;
};

// cpp-httplib transport for ApiService.
class HttpServer {
 public:
  struct Options {
    std::optional<std::string> cors_origin;
    // Served at "/" when set, e.g. the explorer UI build.
    std::optional<std::filesystem::path> static_dir;
  };

  HttpServer(const ApiService& service, Options options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks an ephemeral port. Returns the bound port; IoError when the
  // address is unavailable.
  int bind(const std::string& host, int port);
  // Blocks until stop(). Returns at once if stop() came first.
  void listen();
  // Safe from any thread, before or during listen().
  void stop();

 private:
  std::unique_ptr<httplib::Server> server_;
  std::mutex state_mutex_;
  bool listening_ = false;
  bool stopped_ = false;
};

}  // namespace ambiprune

#endif  // AMBIPRUNE_SERVICE_H_
