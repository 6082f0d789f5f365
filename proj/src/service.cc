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

#include "ambiprune/service.h"

#include <charconv>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "ambiprune/error.h"
#include "ambiprune/eval.h"
#include "ambiprune/image_crop.h"
#include "ambiprune/prune.h"
#include "httplib.h"

namespace ambiprune {

using nlohmann::json;

namespace {

ApiResponse json_response(int status, const json& body) {
  return ApiResponse{status, body.dump(2) + "\n", "application/json", {}};
}

ApiResponse error_response(int status, std::string_view message) {
  return json_response(status, json{{"error", message}, {"status", status}});
}

ApiResponse not_loaded() { return error_response(503, "no dataset loaded"); }

std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() ||
      !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<std::size_t> parse_count(std::string_view text) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::string percent_encode(std::string_view text) {
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += fmt::format("%{:02X}", c);
    }
  }
  return out;
}

}  // namespace

SessionState::SessionState(Dataset dataset,
                           std::optional<std::vector<Detection>> detections)
    : dataset_(std::move(dataset)), detections_(std::move(detections)) {
  require_scored(dataset_, "the API service");
  ranking_ = rank_by_ambiguity(dataset_);
  for (std::size_t i = 0; i < dataset_.images.size(); ++i) {
    const auto& instances = dataset_.images[i].instances;
    for (std::size_t j = 0; j < instances.size(); ++j) {
      by_id_.emplace(instances[j].id, InstanceRef{i, j});
    }
  }
}

std::optional<InstanceRef> SessionState::find(std::string_view instance_id) const {
  auto it = by_id_.find(instance_id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

ApiService::ApiService(std::shared_ptr<const SessionState> session,
                       ServiceOptions options)
    : session_(std::move(session)),
      options_(std::move(options)),
      cache_(std::make_unique<LruCache<CacheKey, std::string>>(
          options_.cache_capacity)) {}

ApiResponse ApiService::healthz() const {
  return ApiResponse{200, "ok", "text/plain", {}};
}

ApiResponse ApiService::dataset_summary() const {
  if (!session_) return not_loaded();
  const Dataset& d = session_->dataset();
  AmbiguitySummary summary = summarize_ambiguity(d);
  json stats = summary_to_json(summary);
  return json_response(200, json{{"name", d.name},
                                 {"images", summary.images},
                                 {"instances", summary.instances},
                                 {"scored", summary.scored},
                                 {"ambiguity",
                                  json{{"mean", stats["mean"]},
                                       {"quantiles", stats["quantiles"]}}},
                                 {"provenance", d.provenance}});
}

ApiResponse ApiService::ambiguity_histogram(const QueryParams& query) const {
  if (!session_) return not_loaded();
  std::size_t bins = kDefaultHistogramBins;
  if (auto it = query.find("bins"); it != query.end()) {
    auto parsed = parse_count(it->second);
    if (!parsed || *parsed < 1 || *parsed > kMaxHistogramBins) {
      return error_response(400, "bins must be an integer in [1, 200]");
    }
    bins = *parsed;
  }
  return json_response(200,
                       histogram_to_json(histogram(session_->dataset(), bins)));
}

ApiResponse ApiService::instances(const QueryParams& query) const {
  if (!session_) return not_loaded();
  auto number = [&](std::string_view key, double fallback) -> std::optional<double> {
    auto it = query.find(key);
    return it == query.end() ? fallback : parse_double(it->second);
  };
  auto count = [&](std::string_view key,
                   std::size_t fallback) -> std::optional<std::size_t> {
    auto it = query.find(key);
    return it == query.end() ? fallback : parse_count(it->second);
  };
  auto min_amb = number("min_amb", 0.0);
  auto max_amb = number("max_amb", 1.0);
  if (!min_amb || !max_amb || *min_amb < 0.0 || *max_amb > 1.0 ||
      *min_amb > *max_amb) {
    return error_response(400, "require 0 <= min_amb <= max_amb <= 1");
  }
  auto page = count("page", 0);
  auto page_size = count("page_size", kDefaultPageSize);
  if (!page || !page_size || *page_size < 1 || *page_size > kMaxPageSize) {
    return error_response(400, "page must be >= 0 and page_size in [1, 1000]");
  }

  const Dataset& d = session_->dataset();
  std::vector<const RankedInstance*> band;
  for (const auto& ranked : session_->ranking()) {
    if (ranked.ambiguity >= *min_amb && ranked.ambiguity <= *max_amb) {
      band.push_back(&ranked);
    }
  }
  std::size_t pages = (band.size() + *page_size - 1) / *page_size;
  if (*page >= pages && !(band.empty() && *page == 0)) {
    return error_response(404, "page beyond end");
  }

  json items = json::array();
  std::size_t begin = *page * *page_size;
  std::size_t end = std::min(band.size(), begin + *page_size);
  for (std::size_t k = begin; k < end; ++k) {
    const ImageRecord& image = d.images[band[k]->ref.image];
    const Instance& inst = resolve(d, band[k]->ref);
    json item{{"id", inst.id},
              {"image_id", image.image_id},
              {"ambiguity", band[k]->ambiguity},
              {"bbox", json::array({inst.bbox.x0, inst.bbox.y0, inst.bbox.x1,
                                    inst.bbox.y1})},
              {"identity", inst.identity},
              {"occlusion", to_string(inst.occlusion)},
              {"truncation", to_string(inst.truncation)},
              {"ignore", inst.ignore}};
    if (image.image_path) item["crop_url"] = "/crops/" + percent_encode(inst.id);
    items.push_back(std::move(item));
  }
  return json_response(200, json{{"total", band.size()},
                                 {"page", *page},
                                 {"page_size", *page_size},
                                 {"pages", pages},
                                 {"min_amb", *min_amb},
                                 {"max_amb", *max_amb},
                                 {"instances", std::move(items)}});
}

ApiResponse ApiService::whatif(std::string_view body) const {
  if (!session_) return not_loaded();
  if (!session_->detections()) {
    return error_response(409, "no detections loaded");
  }
  json request = json::parse(body, nullptr, false);
  if (request.is_discarded() || !request.is_object()) {
    return error_response(400, "body must be a JSON object");
  }
  auto number = [&](const char* key, std::optional<double> fallback)
      -> std::optional<double> {
    auto it = request.find(key);
    if (it == request.end()) return fallback;
    if (!it->is_number()) return std::nullopt;
    double v = it->get<double>();
    return std::isfinite(v) ? std::optional<double>(v) : std::nullopt;
  };
  auto threshold = number("threshold", std::nullopt);
  auto iou_threshold = number("iou", 0.5);
  auto conf = number("conf", 0.5);
  if (!threshold || *threshold < 0.0 || *threshold > 1.0) {
    return error_response(400, "threshold must be a number in [0, 1]");
  }
  if (!iou_threshold || *iou_threshold <= 0.0 || *iou_threshold > 1.0) {
    return error_response(400, "iou must be a number in (0, 1]");
  }
  if (!conf || *conf < 0.0 || *conf > 1.0) {
    return error_response(400, "conf must be a number in [0, 1]");
  }
  std::string subset_name = "reasonable";
  if (auto it = request.find("subset"); it != request.end()) {
    if (!it->is_string()) return error_response(400, "subset must be a string");
    subset_name = it->get<std::string>();
  }
  const SubsetSpec* subset = nullptr;
  for (const auto& spec : builtin_subsets()) {
    if (spec.name == subset_name) subset = &spec;
  }
  if (!subset) return error_response(400, "unknown subset " + subset_name);

  CacheKey key{*threshold, subset_name, *iou_threshold, *conf};
  if (auto cached = cache_->get(key)) {
    return ApiResponse{200, std::move(*cached), "application/json",
                       {{"X-Cache", "hit"}}};
  }
  try {
    PruneOutcome pruned =
        prune(session_->dataset(), *threshold, PruneMode::kIgnore,
              PruneOptions{.jobs = options_.jobs});
    EvalOptions eval_options;
    eval_options.iou_threshold = *iou_threshold;
    eval_options.confidence_threshold = *conf;
    eval_options.identity = options_.identity;
    eval_options.jobs = options_.jobs;
    std::string payload = serialize_eval_result(
        evaluate(pruned.dataset, *session_->detections(), *subset, eval_options));
    cache_->put(key, payload);
    return ApiResponse{200, std::move(payload), "application/json",
                       {{"X-Cache", "miss"}}};
  } catch (const Error& e) {
    return error_response(e.kind() == ErrorKind::kIo ? 500 : 422, e.what());
  }
}

ApiResponse ApiService::crop(std::string_view instance_id) const {
  if (!session_) return not_loaded();
  auto ref = session_->find(instance_id);
  if (!ref) return error_response(404, "unknown instance " + std::string(instance_id));
  const ImageRecord& image = session_->dataset().images[ref->image];
  if (!image.image_path) {
    return error_response(409, "dataset has no image source for " + image.image_id);
  }
  std::filesystem::path path = *image.image_path;
  if (path.is_relative() && !options_.image_root.empty()) {
    path = options_.image_root / path;
  }
  try {
    RgbaImage decoded = read_png(path);
    PixelRect rect = padded_crop_rect(resolve(session_->dataset(), *ref).bbox,
                                      decoded.width, decoded.height);
    return ApiResponse{200, encode_png(ambiprune::crop(decoded, rect)), "image/png", {}};
  } catch (const Error& e) {
    spdlog::warn("crop {}: {}", instance_id, e.what());
    return error_response(500, e.what());
  }
}

HttpServer::HttpServer(const ApiService& service, Options options)
    : server_(std::make_unique<httplib::Server>()) {
  // no SO_REUSEPORT: a busy port must fail to bind
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  auto send = [](httplib::Response& res, const ApiResponse& api) {
    res.status = api.status;
    for (const auto& [name, value] : api.headers) res.set_header(name, value);
    res.set_content(api.body, api.content_type);
  };
  auto query = [](const httplib::Request& req) {
    QueryParams params;
    for (const auto& [key, value] : req.params) params.emplace(key, value);
    return params;
  };

  server_->Get("/healthz", [&service, send](const httplib::Request&,
                                            httplib::Response& res) {
    send(res, service.healthz());
  });
  server_->Get("/dataset/summary", [&service, send](const httplib::Request&,
                                                    httplib::Response& res) {
    send(res, service.dataset_summary());
  });
  server_->Get("/ambiguity/histogram",
               [&service, send, query](const httplib::Request& req,
                                       httplib::Response& res) {
                 send(res, service.ambiguity_histogram(query(req)));
               });
  server_->Get("/instances", [&service, send, query](const httplib::Request& req,
                                                     httplib::Response& res) {
    send(res, service.instances(query(req)));
  });
  server_->Post("/whatif", [&service, send](const httplib::Request& req,
                                            httplib::Response& res) {
    send(res, service.whatif(req.body));
  });
  server_->Get(R"(/crops/(.+))", [&service, send](const httplib::Request& req,
                                                  httplib::Response& res) {
    send(res, service.crop(req.matches[1].str()));
  });

  if (options.cors_origin) {
    std::string origin = *options.cors_origin;
    server_->Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
    });
    server_->set_post_routing_handler(
        [origin](const httplib::Request&, httplib::Response& res) {
          res.set_header("Access-Control-Allow-Origin", origin);
          res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
          res.set_header("Access-Control-Allow-Headers", "Content-Type");
        });
  }
  if (options.static_dir) {
    if (!server_->set_mount_point("/", options.static_dir->string())) {
      throw IoError("cannot serve static files from " +
                    options.static_dir->string());
    }
  }
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind to " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) {
    throw IoError(fmt::format("cannot bind to {}:{} (port busy?)", host, port));
  }
  return port;
}

void HttpServer::listen() {
  {
    std::lock_guard lock(state_mutex_);
    if (stopped_) return;
    listening_ = true;
  }
  server_->listen_after_bind();
}

void HttpServer::stop() {
  {
    std::lock_guard lock(state_mutex_);
    stopped_ = true;
    if (!listening_) return;
  }
  server_->wait_until_ready();
  server_->stop();
}

}  // namespace ambiprune
