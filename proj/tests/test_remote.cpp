#include <catch2/catch_amalgamated.hpp>

#include "csc/remote.hpp"
#include "support/mock_embed_server.hpp"

using namespace csc;
using csc::testing::MockBehavior;
using csc::testing::MockEmbedServer;
using csc::testing::mock_vector;

namespace {

RemoteOptions options_for(const MockEmbedServer& server, std::size_t batch = 64) {
  RemoteOptions o;
  o.endpoint = server.endpoint();
  o.model = "mock";
  o.batch_size = batch;
  o.initial_backoff = std::chrono::milliseconds(5);
  o.timeout = std::chrono::seconds(5);
  return o;
}

std::vector<std::string> numbered_texts(std::size_t n) {
  std::vector<std::string> t;
  for (std::size_t i = 0; i < n; ++i) t.push_back("sentence number " + std::to_string(i));
  return t;
}

}  // namespace

TEST_CASE("remote embedder preserves order", "[remote]") {
  MockEmbedServer server(MockBehavior::Echo, 8);
  RemoteEmbedder e(options_for(server));
  auto texts = numbered_texts(3);
  auto out = e.embed(texts);
  REQUIRE(out.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(out[i]->values == mock_vector(texts[i], 8));
  CHECK(e.dim() == 8);
  CHECK(e.name() == "remote:mock");
}

TEST_CASE("remote embedder batches and reassembles in order", "[remote]") {
  MockEmbedServer server(MockBehavior::Echo, 6);
  auto opts = options_for(server, 4);
  opts.max_in_flight = 3;
  RemoteEmbedder e(opts);
  auto texts = numbered_texts(23);
  auto out = e.embed(texts);
  REQUIRE(out.size() == 23);
  for (std::size_t i = 0; i < texts.size(); ++i) CHECK(out[i]->values == mock_vector(texts[i], 6));
  auto sizes = server.batch_sizes();
  CHECK(sizes.size() == 6);
  CHECK(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) == 23);
  CHECK(*std::max_element(sizes.begin(), sizes.end()) == 4);
}

TEST_CASE("remote embedder detects count mismatch", "[remote]") {
  MockEmbedServer server(MockBehavior::DropLast);
  RemoteEmbedder e(options_for(server));
  auto texts = numbered_texts(3);
  CHECK_THROWS_WITH(e.embed(texts), Catch::Matchers::ContainsSubstring("count mismatch"));
}

TEST_CASE("remote embedder detects dimension inconsistency across batches", "[remote]") {
  MockEmbedServer server(MockBehavior::ShrinkingDims, 8);
  RemoteEmbedder e(options_for(server, 2));
  auto texts = numbered_texts(4);
  CHECK_THROWS_WITH(e.embed(texts), Catch::Matchers::ContainsSubstring("dimension inconsistency"));
}

TEST_CASE("remote embedder retries transient failures", "[remote]") {
  MockEmbedServer server(MockBehavior::FailFirstN, 8, 2);
  RemoteEmbedder e(options_for(server));
  auto texts = numbered_texts(2);
  auto out = e.embed(texts);
  CHECK(out[1]->values == mock_vector(texts[1], 8));
  CHECK(server.requests() == 3);
}

TEST_CASE("remote embedder gives up after the attempt budget", "[remote]") {
  MockEmbedServer server(MockBehavior::AlwaysFail);
  RemoteEmbedder e(options_for(server));
  auto texts = numbered_texts(2);
  CHECK_THROWS_WITH(e.embed(texts), Catch::Matchers::ContainsSubstring("503"));
  CHECK(server.requests() == 3);
}

TEST_CASE("remote embedder does not retry client errors", "[remote]") {
  MockEmbedServer server(MockBehavior::BadRequest);
  RemoteEmbedder e(options_for(server));
  auto texts = numbered_texts(1);
  CHECK_THROWS_AS(e.embed(texts), Error);
  CHECK(server.requests() == 1);
}

TEST_CASE("remote embedder reports transport failures", "[remote]") {
  int dead_port = 0;
  {
    MockEmbedServer server;
    dead_port = server.port();
  }
  RemoteOptions o;
  o.endpoint = "http://127.0.0.1:" + std::to_string(dead_port);
  o.model = "mock";
  o.attempts = 2;
  o.initial_backoff = std::chrono::milliseconds(1);
  o.timeout = std::chrono::seconds(2);
  RemoteEmbedder e(o);
  auto texts = numbered_texts(1);
  CHECK_THROWS_WITH(e.embed(texts), Catch::Matchers::ContainsSubstring("transport error"));
  CHECK(e.requests_sent() == 2);
}

TEST_CASE("remote embedder accepts a base path", "[remote]") {
  MockEmbedServer server;
  auto o = options_for(server);
  o.endpoint += "/";
  RemoteEmbedder e(o);
  auto texts = numbered_texts(1);
  CHECK(e.embed(texts).size() == 1);
}
