#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>

namespace coan {

/// Streaming writer for one compressed file.
class CompressedWriter {
 public:
  virtual ~CompressedWriter() = default;
  virtual void write(std::string_view data) = 0;
  /// Flushes the codec trailer and closes the file. Must be called exactly once.
  virtual void close() = 0;
};

/// Pluggable compression for fused chunks. Output is a pure function of the
/// input bytes so reruns stay byte-identical.
class Codec {
 public:
  virtual ~Codec() = default;
  virtual std::string name() const = 0;
  virtual std::string extension() const = 0;
  virtual std::unique_ptr<CompressedWriter> open_writer(const std::filesystem::path& path) const = 0;
  /// Streams the decompressed contents line by line (without the newline).
  virtual void read_lines(const std::filesystem::path& path,
                          const std::function<void(std::string_view)>& on_line) const = 0;
};

/// "gzip" (level 3), "gzip:<1-9>", or "none".
std::unique_ptr<Codec> make_codec(std::string_view spec);

}  // namespace coan
