#pragma once

// HTTP client for embedding services.
//
// Wire format:
//   POST <endpoint>/embed
//   request  {"model": "<name>", "texts": ["...", ...]}
//   response {"vectors": [[x, ...], ...]}   one vector per text, same order
// Any status other than 200 is an error. Transport failures, 429 and 5xx are
// retried with exponential backoff; everything else fails immediately.

#include <chrono>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "csc/common.hpp"
#include "csc/embed.hpp"

namespace csc {

struct RemoteOptions {
  std::string endpoint = "http://127.0.0.1:8080";
  std::string model;
  std::size_t batch_size = 64;
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{250};
  std::chrono::seconds timeout{60};
  std::size_t max_in_flight = 1;
};

class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(RemoteOptions options) : opts_(std::move(options)) {
    if (opts_.batch_size == 0) throw Error("remote embedder: batch size must be >= 1");
    if (opts_.attempts < 1) throw Error("remote embedder: attempts must be >= 1");
    split_endpoint();
  }

  std::string name() const override { return "remote:" + opts_.model; }

  std::vector<std::optional<EmbeddingVector>> embed(std::span<const std::string> texts) override {
    std::vector<std::optional<EmbeddingVector>> out(texts.size());
    const std::size_t batches = (texts.size() + opts_.batch_size - 1) / opts_.batch_size;
    parallel_for(batches, opts_.max_in_flight, [&](std::size_t b) {
      const std::size_t begin = b * opts_.batch_size;
      const std::size_t end = std::min(texts.size(), begin + opts_.batch_size);
      auto vectors = post_batch(texts.subspan(begin, end - begin));
      for (std::size_t i = begin; i < end; ++i) out[i] = std::move(vectors[i - begin]);
    });
    return out;
  }

  /// Dimension observed so far in this run (0 before the first response).
  std::size_t dim() const {
    std::lock_guard lock(dim_mutex_);
    return dim_;
  }

  /// Number of HTTP requests issued, including retries.
  std::size_t requests_sent() const { return requests_.load(); }

 private:
  void split_endpoint() {
    const std::string& e = opts_.endpoint;
    auto scheme = e.find("://");
    auto path_start = e.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path_start == std::string::npos) {
      host_ = e;
      path_ = "/embed";
    } else {
      host_ = e.substr(0, path_start);
      path_ = e.substr(path_start);
      while (!path_.empty() && path_.back() == '/') path_.pop_back();
      path_ += "/embed";
    }
  }

  std::vector<EmbeddingVector> post_batch(std::span<const std::string> texts) {
    nlohmann::json req{{"model", opts_.model}, {"texts", nlohmann::json::array()}};
    for (const auto& t : texts) req["texts"].push_back(t);
    const std::string body = req.dump();

    std::string last_error;
    auto backoff = opts_.initial_backoff;
    for (int attempt = 1; attempt <= opts_.attempts; ++attempt) {
      if (attempt > 1) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
      httplib::Client client(host_);
      client.set_connection_timeout(opts_.timeout);
      client.set_read_timeout(opts_.timeout);
      client.set_write_timeout(opts_.timeout);
      ++requests_;
      auto res = client.Post(path_, body, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 200) return parse_response(res->body, texts.size());
      last_error = "HTTP status " + std::to_string(res->status);
      if (res->status != 429 && res->status < 500) break;
    }
    throw Error("remote embedder '" + opts_.model + "' at " + opts_.endpoint + ": " + last_error + " after " +
                std::to_string(opts_.attempts) + " attempt(s)");
  }

  std::vector<EmbeddingVector> parse_response(const std::string& body, std::size_t expected) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(std::string("remote embedder: malformed response: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("vectors") || !doc["vectors"].is_array()) {
      throw Error("remote embedder: response lacks a 'vectors' array");
    }
    const auto& arr = doc["vectors"];
    if (arr.size() != expected) {
      throw Error("remote embedder: count mismatch (sent " + std::to_string(expected) + " texts, received " +
                  std::to_string(arr.size()) + " vectors)");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(arr.size());
    for (const auto& row : arr) {
      if (!row.is_array() || row.empty()) throw Error("remote embedder: vector is not a non-empty array");
      std::vector<double> v;
      v.reserve(row.size());
      for (const auto& x : row) {
        if (!x.is_number()) throw Error("remote embedder: non-numeric vector component");
        v.push_back(x.get<double>());
      }
      check_dim(v.size());
      out.emplace_back(std::move(v));
    }
    return out;
  }

  void check_dim(std::size_t d) {
    std::lock_guard lock(dim_mutex_);
    if (dim_ == 0) dim_ = d;
    if (d != dim_) {
      throw Error("remote embedder: dimension inconsistency (expected " + std::to_string(dim_) + ", got " +
                  std::to_string(d) + ")");
    }
  }

  RemoteOptions opts_;
  std::string host_;
  std::string path_;
  mutable std::mutex dim_mutex_;
  std::size_t dim_ = 0;
  std::atomic<std::size_t> requests_{0};
};

}  // namespace csc
