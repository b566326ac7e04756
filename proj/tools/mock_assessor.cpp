// Local stand-in for the assessor endpoint, for offline pipeline runs.
//
//   mock_assessor [--port 8089] [--screen-no] [--fail-first n] [--garble]

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "omnijigsaw/error.hpp"
#include "omnijigsaw/mock_assessor.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Deterministic mock of the chat-completion assessor"};
  int port = 8089;
  std::string host = "127.0.0.1";
  bool screen_no = false;
  omnijigsaw::MockAssessorConfig cfg;
  app.add_option("--host", host);
  app.add_option("--port", port);
  app.add_flag("--screen-no", screen_no, "answer NO to every screening request");
  app.add_option("--fail-first", cfg.fail_first, "number of requests answered with HTTP 503");
  app.add_flag("--garble", cfg.garble, "malformed judge and selector answers");
  CLI11_PARSE(app, argc, argv);
  cfg.screen_yes = !screen_no;

  omnijigsaw::MockAssessorServer server(cfg);
  spdlog::info("listening on http://{}:{}/v1/chat/completions", host, port);
  try {
    server.listen_blocking(host, port);
  } catch (const omnijigsaw::Error& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
