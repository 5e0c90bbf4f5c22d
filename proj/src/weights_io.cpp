#include "percept/weights_io.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <string>

#include "percept/error.hpp"

namespace percept {

namespace {

constexpr char kMagic[4] = {'P', 'C', 'P', 'T'};

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32s(const std::vector<float>& values) {
    for (float f : values) u32(std::bit_cast<std::uint32_t>(f));
  }
  void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return bytes_[pos_++];
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  // A u32 that must fit a positive int.
  int dim(const char* what) {
    const std::size_t at = pos_;
    const std::uint32_t v = u32(what);
    if (v == 0 || v > (1u << 24)) throw FormatError(at, std::string("implausible ") + what);
    return static_cast<int>(v);
  }
  int count(const char* what) {
    const std::size_t at = pos_;
    const std::uint32_t v = u32(what);
    if (v > (1u << 24)) throw FormatError(at, std::string("implausible ") + what);
    return static_cast<int>(v);
  }
  std::vector<float> f32s(std::size_t n, const char* what) {
    if (n > (bytes_.size() - pos_) / 4) {
      throw FormatError(pos_, std::string("truncated ") + what);
    }
    std::vector<float> out(n);
    for (auto& f : out) f = std::bit_cast<float>(u32(what));
    return out;
  }
  std::string str(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(pos_, std::string("unexpected end of file reading ") + what);
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_network(const Network& net) {
  Writer w;
  w.raw(std::string_view(kMagic, 4));
  w.u32(kWeightFileVersion);
  w.u32(static_cast<std::uint32_t>(net.layer_count()));
  w.u32(static_cast<std::uint32_t>(net.input_shape().size()));
  for (int d : net.input_shape()) w.u32(static_cast<std::uint32_t>(d));
  for (const Layer& layer : net.layers()) {
    w.u16(static_cast<std::uint16_t>(layer.name.size()));
    w.raw(layer.name);
    w.u8(static_cast<std::uint8_t>(layer.kind()));
    if (const auto* c = std::get_if<Conv2d>(&layer.params)) {
      w.u32(static_cast<std::uint32_t>(c->in_channels));
      w.u32(static_cast<std::uint32_t>(c->out_channels));
      w.u32(static_cast<std::uint32_t>(c->kernel));
      w.u32(static_cast<std::uint32_t>(c->stride));
      w.u32(static_cast<std::uint32_t>(c->padding));
      w.f32s(c->weights);
      w.f32s(c->bias);
    } else if (const auto* p = std::get_if<MaxPool2d>(&layer.params)) {
      w.u32(static_cast<std::uint32_t>(p->kernel));
      w.u32(static_cast<std::uint32_t>(p->stride));
    } else if (const auto* d = std::get_if<Dense>(&layer.params)) {
      w.u32(static_cast<std::uint32_t>(d->in_features));
      w.u32(static_cast<std::uint32_t>(d->out_features));
      w.f32s(d->weights);
      w.f32s(d->bias);
    }
  }
  return w.take();
}

Network decode_network(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.str(4, "magic") != std::string_view(kMagic, 4)) {
    throw FormatError(0, "bad magic, expected \"PCPT\"");
  }
  const std::uint32_t version = r.u32("version");
  if (version != kWeightFileVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "weight file version " + std::to_string(version) + " is not supported (expected " +
                    std::to_string(kWeightFileVersion) + ")");
  }
  const int layer_count = r.count("layer count");
  const int rank = r.count("input rank");
  if (rank < 1 || rank > 4) throw FormatError(r.offset() - 4, "input rank out of range");
  Shape input_shape;
  for (int i = 0; i < rank; ++i) input_shape.push_back(r.dim("input dimension"));

  std::vector<Layer> layers;
  for (int li = 0; li < layer_count; ++li) {
    const std::uint16_t name_len = r.u16("layer name length");
    std::string name = r.str(name_len, "layer name");
    const std::size_t kind_at = r.offset();
    const std::uint8_t tag = r.u8("layer kind");
    switch (static_cast<LayerKind>(tag)) {
      case LayerKind::kConv2d: {
        Conv2d c;
        c.in_channels = r.dim("conv2d in_channels");
        c.out_channels = r.dim("conv2d out_channels");
        c.kernel = r.dim("conv2d kernel");
        c.stride = r.dim("conv2d stride");
        c.padding = r.count("conv2d padding");
        c.weights = r.f32s(static_cast<std::size_t>(c.out_channels) * c.in_channels * c.kernel * c.kernel,
                           "conv2d weights");
        c.bias = r.f32s(static_cast<std::size_t>(c.out_channels), "conv2d bias");
        layers.push_back({std::move(name), std::move(c)});
        break;
      }
      case LayerKind::kRelu:
        layers.push_back(make_relu(std::move(name)));
        break;
      case LayerKind::kMaxPool2d: {
        MaxPool2d p;
        p.kernel = r.dim("maxpool2d kernel");
        p.stride = r.dim("maxpool2d stride");
        layers.push_back({std::move(name), p});
        break;
      }
      case LayerKind::kFlatten:
        layers.push_back(make_flatten(std::move(name)));
        break;
      case LayerKind::kDense: {
        Dense d;
        d.in_features = r.dim("dense in_features");
        d.out_features = r.dim("dense out_features");
        d.weights = r.f32s(static_cast<std::size_t>(d.in_features) * d.out_features, "dense weights");
        d.bias = r.f32s(static_cast<std::size_t>(d.out_features), "dense bias");
        layers.push_back({std::move(name), std::move(d)});
        break;
      }
      case LayerKind::kSoftmax:
        layers.push_back(make_softmax(std::move(name)));
        break;
      default:
        throw FormatError(kind_at, "unknown layer kind tag " + std::to_string(tag));
    }
  }
  if (!r.done()) throw FormatError(r.offset(), "trailing bytes after last layer");
  return Network(std::move(input_shape), std::move(layers));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "failed writing '" + path.string() + "'");
}

Network load_network(const std::filesystem::path& path) {
  return decode_network(read_file_bytes(path));
}

void save_network(const Network& net, const std::filesystem::path& path) {
  write_file_bytes(path, encode_network(net));
}

}  // namespace percept
