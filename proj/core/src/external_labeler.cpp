#include "parcelsense/external_labeler.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <thread>
#include <unordered_map>

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <json.hpp>

extern char** environ;

namespace parcelsense {

using nlohmann::json;

namespace wire {

std::string encode_base64(std::span<const std::uint8_t> bytes) {
  using namespace boost::archive::iterators;
  using Encoder = base64_from_binary<transform_width<const std::uint8_t*, 6, 8>>;
  std::string out(Encoder(bytes.data()), Encoder(bytes.data() + bytes.size()));
  out.append((4 - out.size() % 4) % 4, '=');
  return out;
}

std::vector<std::uint8_t> decode_base64(std::string_view text) {
  using namespace boost::archive::iterators;
  using Decoder = transform_width<binary_from_base64<std::string_view::const_iterator>, 8, 6>;
  if (text.size() % 4 != 0) throw ProtocolError("base64 length is not a multiple of 4");
  std::size_t pad = 0;
  while (pad < 2 && pad < text.size() && text[text.size() - 1 - pad] == '=') ++pad;
  const std::string_view body = text.substr(0, text.size() - pad);
  const std::size_t size = body.size() * 6 / 8;
  std::vector<std::uint8_t> out;
  out.reserve(size);
  try {
    for (Decoder it(body.begin()), end(body.end()); it != end && out.size() < size; ++it) {
      out.push_back(static_cast<std::uint8_t>(*it));
    }
  } catch (const std::exception&) {
    throw ProtocolError("invalid base64 payload");
  }
  if (out.size() != size) throw ProtocolError("truncated base64 payload");
  return out;
}

namespace {

struct Encoder {
  json operator()(const Hello& m) const { return {{"type", "hello"}, {"vocabulary", m.vocabulary}}; }
  json operator()(const LabelRequest& m) const {
    return {{"type", "label"},
            {"id", m.id},
            {"width", m.pixels.width},
            {"height", m.pixels.height},
            {"bands", m.pixels.bands},
            {"pixels", encode_base64(m.pixels.pixels)}};
  }
  json operator()(const LabelResult& m) const {
    json j = {{"type", "result"}, {"id", m.id}, {"word", m.word}};
    if (m.probs) j["probs"] = *m.probs;
    return j;
  }
  json operator()(const ErrorReply& m) const {
    json j = {{"type", "error"}, {"message", m.message}};
    if (m.id) j["id"] = *m.id;
    return j;
  }
  json operator()(const End&) const { return {{"type", "end"}}; }
};

}  // namespace

std::string encode(const Message& message) { return std::visit(Encoder{}, message).dump(); }

Message decode(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed JSON line: ") + e.what());
  }
  try {
    if (!j.is_object()) throw ProtocolError("protocol message must be a JSON object");
    const std::string type = j.at("type").get<std::string>();
    if (type == "hello") {
      Hello h{j.at("vocabulary").get<std::vector<std::string>>()};
      if (h.vocabulary.empty()) throw ProtocolError("hello declares an empty vocabulary");
      return h;
    }
    if (type == "label") {
      const int w = j.at("width").get<int>();
      const int h = j.at("height").get<int>();
      const int b = j.at("bands").get<int>();
      if (w < 1 || h < 1 || b < 1 || b > 4) throw ProtocolError("invalid patch dimensions");
      LabelRequest req{j.at("id").get<std::int64_t>(), RasterGrid(w, h, b)};
      auto bytes = decode_base64(j.at("pixels").get<std::string>());
      if (bytes.size() != req.pixels.pixels.size()) {
        throw ProtocolError("pixel payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                            std::to_string(req.pixels.pixels.size()));
      }
      req.pixels.pixels = std::move(bytes);
      return req;
    }
    if (type == "result") {
      LabelResult r{j.at("id").get<std::int64_t>(), j.at("word").get<std::string>(), std::nullopt};
      if (j.contains("probs")) r.probs = j.at("probs").get<std::vector<double>>();
      return r;
    }
    if (type == "error") {
      ErrorReply e;
      if (j.contains("id") && j.at("id").is_number_integer()) e.id = j.at("id").get<std::int64_t>();
      e.message = j.value("message", std::string("unspecified worker error"));
      return e;
    }
    if (type == "end") return End{};
    throw ProtocolError("unknown message type '" + type + "'");
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("invalid protocol message: ") + e.what());
  }
}

}  // namespace wire

namespace {

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void close_fd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

}  // namespace

WorkerProcess::WorkerProcess(const std::string& command) {
  ignore_sigpipe();
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw ProtocolError("pipe() failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw ProtocolError("pipe() failed");
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

  std::string shell = "/bin/sh";
  std::string flag = "-c";
  std::string cmd = command;
  char* argv[] = {shell.data(), flag.data(), cmd.data(), nullptr};
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);
  pid_t pid = -1;
  const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, &attr, argv, environ);
  posix_spawnattr_destroy(&attr);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    throw ProtocolError("cannot start worker '" + command + "': " + std::strerror(rc));
  }
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

WorkerProcess::~WorkerProcess() {
  if (pid_ > 0) wait(std::chrono::milliseconds(500));
  close_fd(to_child_);
  close_fd(from_child_);
}

void WorkerProcess::send_line(std::string_view line) {
  if (to_child_ < 0) throw ProtocolError("worker input already closed");
  std::string data(line);
  data.push_back('\n');
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("write to worker failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> WorkerProcess::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (from_child_ < 0) return std::nullopt;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw ProtocolError("timed out waiting for the worker");
    pollfd pfd{from_child_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError("poll() on worker output failed");
    }
    if (ready == 0) throw ProtocolError("timed out waiting for the worker");
    char chunk[65536];
    const ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError("read from worker failed");
    }
    if (n == 0) {
      close_fd(from_child_);
      if (buffer_.empty()) return std::nullopt;
      std::string rest = std::move(buffer_);
      buffer_.clear();
      return rest;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void WorkerProcess::close_input() { close_fd(to_child_); }

int WorkerProcess::wait(std::chrono::milliseconds grace) {
  if (pid_ <= 0) return 0;
  close_input();
  int status = 0;
  const auto deadline = std::chrono::steady_clock::now() + grace;
  for (;;) {
    const pid_t r = ::waitpid(pid_, &status, WNOHANG);
    if (r == pid_ || (r < 0 && errno != EINTR)) {
      ::kill(-pid_, SIGKILL);
      break;
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  pid_ = -1;
  return status;
}

ExternalLabeler::ExternalLabeler(const std::string& command, ExternalLabelerOptions options)
    : options_(options), process_(command) {
  auto line = process_.read_line(options_.timeout);
  if (!line) throw ProtocolError("worker exited before sending hello");
  auto message = wire::decode(*line);
  auto* hello = std::get_if<wire::Hello>(&message);
  if (!hello) throw ProtocolError("first worker message must be hello");
  vocabulary_ = std::move(hello->vocabulary);
  std::vector<std::string> sorted = vocabulary_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ProtocolError("worker vocabulary contains duplicates");
  }
}

ExternalLabeler::~ExternalLabeler() {
  try {
    shutdown();
  } catch (...) {
  }
}

void ExternalLabeler::shutdown() {
  std::lock_guard lock(mutex_);
  if (closed_) return;
  closed_ = true;
  if (!broken_) {
    process_.send_line(wire::encode(wire::End{}));
    // Drain until the worker acknowledges; stray results are discarded.
    while (auto line = process_.read_line(options_.timeout)) {
      if (std::holds_alternative<wire::End>(wire::decode(*line))) break;
    }
  }
  process_.wait();
}

std::vector<std::size_t> ExternalLabeler::label(std::span<const PatchSample> patches) const {
  std::lock_guard lock(mutex_);
  return exchange(patches);
}

std::vector<std::string> ExternalLabeler::label_words(std::span<const PatchSample> patches) const {
  const auto ids = label(patches);
  std::vector<std::string> words;
  words.reserve(ids.size());
  for (std::size_t i : ids) words.push_back(vocabulary_[i]);
  return words;
}

std::vector<std::size_t> ExternalLabeler::exchange(std::span<const PatchSample> patches) const {
  if (closed_) throw ProtocolError("worker already shut down");
  if (broken_) throw ProtocolError("worker connection is in a failed state");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) index.emplace(vocabulary_[i], i);

  const std::int64_t base = next_id_;
  next_id_ += static_cast<std::int64_t>(patches.size());
  std::vector<std::size_t> words(patches.size());
  std::size_t sent = 0;
  std::size_t received = 0;
  try {
    while (received < patches.size()) {
      while (sent < patches.size() && sent - received < std::max<std::size_t>(1, options_.window)) {
        wire::LabelRequest req{base + static_cast<std::int64_t>(sent), patches[sent].pixels};
        process_.send_line(wire::encode(req));
        ++sent;
      }
      auto line = process_.read_line(options_.timeout);
      if (!line) throw ProtocolError("worker closed its output mid-batch");
      auto message = wire::decode(*line);
      if (auto* err = std::get_if<wire::ErrorReply>(&message)) {
        throw ProtocolError("worker error: " + err->message);
      }
      auto* result = std::get_if<wire::LabelResult>(&message);
      if (!result) throw ProtocolError("expected a result message");
      const std::int64_t expected = base + static_cast<std::int64_t>(received);
      if (result->id != expected) {
        throw ProtocolError("response id " + std::to_string(result->id) + " out of order (expected " +
                            std::to_string(expected) + ")");
      }
      auto it = index.find(result->word);
      if (it == index.end()) throw ProtocolError("unknown word '" + result->word + "' not in vocabulary");
      words[received++] = it->second;
    }
  } catch (...) {
    broken_ = true;
    throw;
  }
  return words;
}

std::vector<std::string> external_label_batch(const ExternalLabeler& worker,
                                              std::span<const PatchSample> patches) {
  return worker.label_words(patches);
}

}  // namespace parcelsense
