#include "simi/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace simi {
namespace {

constexpr char kMagic[8] = {'S', 'I', 'M', 'I', 'C', 'K', 'P', 'T'};
constexpr char kAdamTag[4] = {'A', 'D', 'A', 'M'};
constexpr char kEndTag[4] = {'E', 'N', 'D', '!'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const char*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  template <typename U>
  void integer(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      buf_.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
    }
  }
  void string(const std::string& s) {
    integer(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  template <typename T>
  void values(const Tensor<T>& t) {
    using Bits = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    for (const T v : t.values()) integer(std::bit_cast<Bits>(v));
  }
  const std::vector<char>& buffer() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> data) : data_(std::move(data)) {}

  void bytes(void* out, std::size_t n) {
    if (n > data_.size() - pos_) throw Error(Errc::CorruptCheckpoint, "checkpoint truncated");
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }
  template <typename U>
  U integer() {
    unsigned char b[sizeof(U)];
    bytes(b, sizeof(U));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return static_cast<U>(v);
  }
  std::string string(std::size_t limit) {
    const auto n = integer<std::uint32_t>();
    if (n > limit) throw Error(Errc::CorruptCheckpoint, "implausible string length");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  void expect(const char* tag, std::size_t n) {
    std::vector<char> got(n);
    bytes(got.data(), n);
    if (std::memcmp(got.data(), tag, n) != 0) throw Error(Errc::CorruptCheckpoint, "bad section tag");
  }
  // Reads `count` values stored with `scalar_bytes` and converts them to T.
  template <typename T>
  void values(Tensor<T>& t, std::uint32_t scalar_bytes) {
    for (T& v : t.values()) {
      if (scalar_bytes == 4) {
        v = static_cast<T>(std::bit_cast<float>(integer<std::uint32_t>()));
      } else {
        v = static_cast<T>(std::bit_cast<double>(integer<std::uint64_t>()));
      }
    }
  }
  bool at_end() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::vector<char> data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

template <typename T>
void save_checkpoint(const std::filesystem::path& path, const nn::ParamStore<T>& store,
                     const CheckpointMeta& meta) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.integer(kCheckpointVersion);
  w.integer(static_cast<std::uint32_t>(sizeof(T)));
  w.integer(meta.config_digest);
  w.string(meta.config_json);
  w.integer(store.step());
  w.integer(static_cast<std::uint32_t>(store.size()));
  for (const auto& p : store.params()) {
    w.string(p.name);
    const Shape s = p.value.shape();
    for (const int d : {s.n, s.c, s.h, s.w}) w.integer(static_cast<std::int32_t>(d));
    w.values(p.value);
  }
  w.bytes(kAdamTag, sizeof kAdamTag);
  for (const auto& p : store.params()) {
    w.values(p.m);
    w.values(p.v);
  }
  w.bytes(kEndTag, sizeof kEndTag);

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write " + tmp.string());
    out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
    if (!out) throw Error(Errc::IoError, "failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileNotFound, "cannot open checkpoint " + path.string());
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}));

  r.expect(kMagic, sizeof kMagic);
  const auto version = r.integer<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw Error(Errc::CorruptCheckpoint, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto scalar_bytes = r.integer<std::uint32_t>();
  if (scalar_bytes != 4 && scalar_bytes != 8) throw Error(Errc::CorruptCheckpoint, "bad scalar width");

  Checkpoint<T> ckpt;
  ckpt.meta.config_digest = r.integer<std::uint64_t>();
  ckpt.meta.config_json = r.string(r.remaining());
  ckpt.store.set_step(r.integer<std::uint64_t>());
  const auto count = r.integer<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.string(4096);
    Shape s;
    s.n = r.integer<std::int32_t>();
    s.c = r.integer<std::int32_t>();
    s.h = r.integer<std::int32_t>();
    s.w = r.integer<std::int32_t>();
    if (s.n <= 0 || s.c <= 0 || s.h <= 0 || s.w <= 0 ||
        s.numel() * scalar_bytes > r.remaining()) {
      throw Error(Errc::CorruptCheckpoint, "bad shape for parameter '" + name + "'");
    }
    Tensor<T> value(s);
    r.values(value, scalar_bytes);
    try {
      ckpt.store.add(std::move(name), std::move(value));
    } catch (const Error&) {
      throw Error(Errc::CorruptCheckpoint, "duplicate parameter name");
    }
  }
  r.expect(kAdamTag, sizeof kAdamTag);
  for (auto& p : ckpt.store.params()) {
    r.values(p.m, scalar_bytes);
    r.values(p.v, scalar_bytes);
  }
  r.expect(kEndTag, sizeof kEndTag);
  if (!r.at_end()) throw Error(Errc::CorruptCheckpoint, "trailing bytes after checkpoint");
  return ckpt;
}

template void save_checkpoint(const std::filesystem::path&, const nn::ParamStore<float>&,
                              const CheckpointMeta&);
template void save_checkpoint(const std::filesystem::path&, const nn::ParamStore<double>&,
                              const CheckpointMeta&);
template Checkpoint<float> load_checkpoint(const std::filesystem::path&);
template Checkpoint<double> load_checkpoint(const std::filesystem::path&);

}  // namespace simi
