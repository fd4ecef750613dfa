// Minimal labeler worker: answers every label request with the first word of
// its vocabulary. Used by the conformance suite and the CLI tests.
//
//   echo_labeler [--vocab a,b,c] [--fail bad-word|bad-id|hang|no-hello|exit]

#include <chrono>
#include <iostream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "parcelsense/errors.hpp"
#include "parcelsense/external_labeler.hpp"

namespace wire = parcelsense::wire;

namespace {

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

void emit(const wire::Message& m) { std::cout << wire::encode(m) << '\n' << std::flush; }

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> vocab{"a"};
  std::string fail;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--vocab" && i + 1 < argc) {
      vocab = split_words(argv[++i]);
    } else if (arg == "--fail" && i + 1 < argc) {
      fail = argv[++i];
    } else {
      std::cerr << "usage: echo_labeler [--vocab a,b] [--fail bad-word|bad-id|hang|no-hello|exit]\n";
      return 1;
    }
  }

  if (fail == "no-hello") {
    std::this_thread::sleep_for(std::chrono::seconds(60));
    return 0;
  }
  emit(wire::Hello{vocab});

  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    wire::Message msg;
    try {
      msg = wire::decode(line);
    } catch (const parcelsense::ProtocolError& e) {
      emit(wire::ErrorReply{std::nullopt, e.what()});
      continue;
    }
    if (std::holds_alternative<wire::End>(msg)) {
      emit(wire::End{});
      return 0;
    }
    const auto* req = std::get_if<wire::LabelRequest>(&msg);
    if (!req) {
      emit(wire::ErrorReply{std::nullopt, "unexpected message type"});
      continue;
    }
    if (fail == "hang") {
      std::this_thread::sleep_for(std::chrono::seconds(60));
      return 0;
    }
    if (fail == "exit") return 3;

    wire::LabelResult r;
    r.id = fail == "bad-id" ? req->id + 1000 : req->id;
    r.word = fail == "bad-word" ? "not-a-word" : vocab.front();
    std::vector<double> probs(vocab.size(), 0.0);
    probs.front() = 1.0;
    r.probs = probs;
    emit(r);
  }
  return 0;
}
