#include "coan/codec.hpp"

#include <zlib.h>

#include <array>
#include <fstream>
#include <vector>

#include "coan/error.hpp"
#include "coan/text.hpp"

namespace coan {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kBufferSize = 1 << 16;

// Feeds raw bytes to a line callback, carrying partial lines between blocks.
class LineAssembler {
 public:
  explicit LineAssembler(const std::function<void(std::string_view)>& on_line) : on_line_(on_line) {}

  void feed(std::string_view block) {
    while (!block.empty()) {
      const auto nl = block.find('\n');
      if (nl == std::string_view::npos) {
        pending_.append(block);
        return;
      }
      if (pending_.empty()) {
        emit(block.substr(0, nl));
      } else {
        pending_.append(block.substr(0, nl));
        emit(pending_);
        pending_.clear();
      }
      block.remove_prefix(nl + 1);
    }
  }

  void finish() {
    if (!pending_.empty()) emit(pending_);
    pending_.clear();
  }

 private:
  void emit(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    on_line_(line);
  }

  const std::function<void(std::string_view)>& on_line_;
  std::string pending_;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write " + path.string());
  return out;
}

class PlainWriter final : public CompressedWriter {
 public:
  explicit PlainWriter(const fs::path& path) : out_(open_out(path)), path_(path) {}
  void write(std::string_view data) override { out_.write(data.data(), static_cast<std::streamsize>(data.size())); }
  void close() override {
    out_.close();
    if (!out_) throw Error("write failed: " + path_.string());
  }

 private:
  std::ofstream out_;
  fs::path path_;
};

class PlainCodec final : public Codec {
 public:
  std::string name() const override { return "none"; }
  std::string extension() const override { return ".csv"; }
  std::unique_ptr<CompressedWriter> open_writer(const fs::path& path) const override {
    return std::make_unique<PlainWriter>(path);
  }
  void read_lines(const fs::path& path,
                  const std::function<void(std::string_view)>& on_line) const override {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + path.string());
    LineAssembler lines(on_line);
    std::vector<char> buf(kBufferSize);
    while (in) {
      in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
      lines.feed(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())));
    }
    lines.finish();
  }
};

class GzipWriter final : public CompressedWriter {
 public:
  GzipWriter(const fs::path& path, int level) : out_(open_out(path)), path_(path) {
    // windowBits 15 + 16 selects the gzip wrapper; its header carries mtime 0.
    if (deflateInit2(&stream_, level, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
      throw Error("deflateInit2 failed");
    }
  }
  ~GzipWriter() override { deflateEnd(&stream_); }

  void write(std::string_view data) override { pump(data, Z_NO_FLUSH); }

  void close() override {
    pump({}, Z_FINISH);
    out_.close();
    if (!out_) throw Error("write failed: " + path_.string());
  }

 private:
  void pump(std::string_view data, int flush) {
    stream_.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    stream_.avail_in = static_cast<uInt>(data.size());
    int rc = Z_OK;
    do {
      stream_.next_out = out_buf_.data();
      stream_.avail_out = static_cast<uInt>(out_buf_.size());
      rc = deflate(&stream_, flush);
      if (rc == Z_STREAM_ERROR) throw Error("deflate failed");
      out_.write(reinterpret_cast<const char*>(out_buf_.data()),
                 static_cast<std::streamsize>(out_buf_.size() - stream_.avail_out));
    } while (stream_.avail_out == 0 || (flush == Z_FINISH && rc != Z_STREAM_END));
  }

  std::ofstream out_;
  fs::path path_;
  z_stream stream_{};
  std::array<Bytef, kBufferSize> out_buf_{};
};

class GzipCodec final : public Codec {
 public:
  explicit GzipCodec(int level) : level_(level) {}
  std::string name() const override { return "gzip:" + std::to_string(level_); }
  std::string extension() const override { return ".csv.gz"; }
  std::unique_ptr<CompressedWriter> open_writer(const fs::path& path) const override {
    return std::make_unique<GzipWriter>(path, level_);
  }

  void read_lines(const fs::path& path,
                  const std::function<void(std::string_view)>& on_line) const override {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + path.string());
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 16) != Z_OK) throw Error("inflateInit2 failed");
    struct Guard {
      z_stream* s;
      ~Guard() { inflateEnd(s); }
    } guard{&zs};
    LineAssembler lines(on_line);
    std::vector<char> in_buf(kBufferSize);
    std::vector<char> out_buf(kBufferSize * 4);
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
      in.read(in_buf.data(), static_cast<std::streamsize>(in_buf.size()));
      const auto got = static_cast<uInt>(in.gcount());
      if (got == 0) throw SchemaError("truncated gzip stream: " + path.string());
      zs.next_in = reinterpret_cast<Bytef*>(in_buf.data());
      zs.avail_in = got;
      do {
        zs.next_out = reinterpret_cast<Bytef*>(out_buf.data());
        zs.avail_out = static_cast<uInt>(out_buf.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END && rc != Z_BUF_ERROR) {
          throw SchemaError("corrupt gzip stream: " + path.string());
        }
        lines.feed(std::string_view(out_buf.data(), out_buf.size() - zs.avail_out));
      } while (zs.avail_out == 0 && rc != Z_STREAM_END);
    }
    lines.finish();
  }

 private:
  int level_;
};

}  // namespace

std::unique_ptr<Codec> make_codec(std::string_view spec) {
  if (spec == "none") return std::make_unique<PlainCodec>();
  if (spec == "gzip") return std::make_unique<GzipCodec>(3);
  if (spec.starts_with("gzip:")) {
    const auto level = parse_int(spec.substr(5));
    if (level && *level >= 1 && *level <= 9) return std::make_unique<GzipCodec>(static_cast<int>(*level));
  }
  throw InvalidInput("unknown codec '" + std::string(spec) + "' (expected gzip, gzip:<1-9>, none)");
}

}  // namespace coan
