#include "apifk/predictor/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "apifk/errors.hpp"

namespace apifk::predictor {

namespace {

constexpr char kMagic[4] = {'C', 'A', 'P', 'I'};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw MalformedDocument("checkpoint truncated");
  }

 private:
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const ConvNetModel& model) {
  const auto& cfg = model.config();
  Writer w;
  w.bytes(std::string_view(kMagic, 4));
  w.u32(kCheckpointVersion);
  w.u8(static_cast<std::uint8_t>(cfg.variant));
  w.u64(cfg.input_length);
  w.f64(cfg.dropout);
  w.u32(static_cast<std::uint32_t>(model.alphabet().size()));
  for (char32_t c : model.alphabet().chars()) w.u32(static_cast<std::uint32_t>(c));
  w.u32(static_cast<std::uint32_t>(model.labels().size()));
  for (const auto& label : model.labels()) {
    w.u32(static_cast<std::uint32_t>(label.size()));
    w.bytes(label);
  }
  for (const auto& layer : cfg.conv) {
    w.u64(layer.in_features);
    w.u64(layer.out_features);
    w.u64(layer.kernel);
    w.u64(layer.stride);
    w.u64(layer.pool.value_or(0));
  }
  for (auto units : cfg.fc) w.u64(units);
  const auto params = model.parameters();
  w.u64(params.size());
  for (double p : params) w.f64(p);
  return w.take();
}

ConvNetModel decode_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (r.bytes(4) != std::string_view(kMagic, 4)) {
    throw MalformedDocument("not a checkpoint (bad magic)");
  }
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw SchemaVersionMismatch("checkpoint version " + std::to_string(version) +
                                " not supported");
  }
  ModelConfig cfg;
  const auto variant = r.u8();
  if (variant > 2) throw MalformedDocument("unknown variant tag");
  cfg.variant = static_cast<Variant>(variant);
  cfg.input_length = r.u64();
  cfg.dropout = r.f64();

  const auto alphabet_size = r.u32();
  r.need(static_cast<std::size_t>(alphabet_size) * 4);
  std::u32string chars;
  for (std::uint32_t i = 0; i < alphabet_size; ++i) chars.push_back(static_cast<char32_t>(r.u32()));

  const auto label_count = r.u32();
  std::vector<std::string> labels;
  for (std::uint32_t i = 0; i < label_count; ++i) {
    const auto len = r.u32();
    labels.emplace_back(r.bytes(len));
  }
  for (auto& layer : cfg.conv) {
    layer.in_features = r.u64();
    layer.out_features = r.u64();
    layer.kernel = r.u64();
    layer.stride = r.u64();
    const auto pool = r.u64();
    if (pool) layer.pool = pool;
  }
  for (auto& units : cfg.fc) units = r.u64();
  const auto count = r.u64();

  try {
    if (count != cfg.parameter_count()) {
      throw MalformedDocument("checkpoint parameter count does not match its layer configs");
    }
    r.need(count * 8);
    ConvNetModel model(cfg, Alphabet(std::move(chars)), std::move(labels));
    for (double& p : model.parameters()) p = r.f64();
    if (!r.done()) throw MalformedDocument("trailing bytes after checkpoint");
    return model;
  } catch (const MalformedDocument&) {
    throw;
  } catch (const Error& e) {
    throw MalformedDocument(std::string("invalid checkpoint: ") + e.what());
  }
}

void save_checkpoint(const ConvNetModel& model, const std::string& path) {
  const auto bytes = encode_checkpoint(model);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write error on " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

ConvNetModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_checkpoint(buf.str());
}

}  // namespace apifk::predictor
