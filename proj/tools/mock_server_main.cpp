// Stand-alone mock embedding service for trying out remote embedders:
//   csc_mock_server [--dim 8] [--behavior echo|drop-last|always-fail]

#include <csignal>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "mock_embed_server.hpp"

namespace {
volatile std::sig_atomic_t g_stop = 0;
}

int main(int argc, char** argv) {
  CLI::App app{"Mock embedding service (POST /embed)"};
  std::size_t dim = 8;
  std::string behavior = "echo";
  app.add_option("--dim", dim, "Vector dimension")->check(CLI::PositiveNumber);
  app.add_option("--behavior", behavior, "echo | drop-last | always-fail")
      ->check(CLI::IsMember({"echo", "drop-last", "always-fail"}));
  CLI11_PARSE(app, argc, argv);

  using csc::testing::MockBehavior;
  const auto b = behavior == "drop-last"     ? MockBehavior::DropLast
                 : behavior == "always-fail" ? MockBehavior::AlwaysFail
                                             : MockBehavior::Echo;
  csc::testing::MockEmbedServer server(b, dim);
  std::cout << server.endpoint() << std::endl;
  std::signal(SIGINT, [](int) { g_stop = 1; });
  std::signal(SIGTERM, [](int) { g_stop = 1; });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  return 0;
}
