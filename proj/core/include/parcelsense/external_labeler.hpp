#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "parcelsense/labeler.hpp"

namespace parcelsense {

// Newline-delimited JSON spoken between this process and a labeler worker
// over the worker's stdin/stdout. One object per line, UTF-8.
namespace wire {

struct Hello {
  std::vector<std::string> vocabulary;
};

struct LabelRequest {
  std::int64_t id = 0;
  RasterGrid pixels;  // sent as base64 of the raw band-interleaved bytes
};

struct LabelResult {
  std::int64_t id = 0;
  std::string word;
  std::optional<std::vector<double>> probs;
};

/// Sent by a worker that could not process a line; the worker keeps running.
struct ErrorReply {
  std::optional<std::int64_t> id;
  std::string message;
};

struct End {};

using Message = std::variant<Hello, LabelRequest, LabelResult, ErrorReply, End>;

/// One line of JSON, without the trailing newline.
std::string encode(const Message& message);

/// Throws ProtocolError on malformed JSON, unknown types, missing fields, or a
/// pixel payload whose length disagrees with width * height * bands.
Message decode(std::string_view line);

std::string encode_base64(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> decode_base64(std::string_view text);

}  // namespace wire

/// A child process started through `/bin/sh -c command` with pipes on its
/// stdin and stdout; stderr is inherited. SIGPIPE is ignored process-wide
/// once the first worker starts, so a dead worker surfaces as an error.
class WorkerProcess {
 public:
  explicit WorkerProcess(const std::string& command);
  ~WorkerProcess();
  WorkerProcess(const WorkerProcess&) = delete;
  WorkerProcess& operator=(const WorkerProcess&) = delete;

  void send_line(std::string_view line);
  /// nullopt at end of stream; ProtocolError on timeout.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);
  void close_input();
  /// Waits up to `grace` for exit, then kills. Returns the raw wait status.
  int wait(std::chrono::milliseconds grace = std::chrono::milliseconds(2000));
  bool running() const { return pid_ > 0; }

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

struct ExternalLabelerOptions {
  std::chrono::milliseconds timeout{30000};
  /// Requests in flight before a response is awaited.
  std::size_t window = 32;
};

/// Client side of the worker protocol: performs the hello handshake on
/// construction and the end exchange on shutdown() or destruction. Calls are
/// serialized per worker.
class ExternalLabeler final : public PatchLabeler {
 public:
  explicit ExternalLabeler(const std::string& command, ExternalLabelerOptions options = {});
  ~ExternalLabeler() override;

  const std::vector<std::string>& vocabulary() const override { return vocabulary_; }
  std::vector<std::size_t> label(std::span<const PatchSample> patches) const override;
  std::vector<std::string> label_words(std::span<const PatchSample> patches) const;
  void shutdown();

 private:
  std::vector<std::size_t> exchange(std::span<const PatchSample> patches) const;

  ExternalLabelerOptions options_;
  mutable std::mutex mutex_;
  mutable WorkerProcess process_;
  mutable std::int64_t next_id_ = 0;
  mutable bool broken_ = false;
  bool closed_ = false;
  std::vector<std::string> vocabulary_;
};

/// One word per patch, order preserving.
std::vector<std::string> external_label_batch(const ExternalLabeler& worker,
                                              std::span<const PatchSample> patches);

}  // namespace parcelsense
