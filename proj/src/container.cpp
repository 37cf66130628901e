#include "hypc/container.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <system_error>

#include "hypc/bitpack.hpp"
#include "hypc/error.hpp"

namespace hypc {

namespace {

constexpr char kNtbMagic[4] = {'N', 'T', 'B', '1'};
constexpr char kHcmpMagic[4] = {'H', 'C', 'M', 'P'};
constexpr std::uint8_t kDtypeF32 = 0;

class ByteWriter {
public:
    void raw(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        bytes_.insert(bytes_.end(), p, p + n);
    }

    template <typename T>
    void le(T value) {
        static_assert(std::is_unsigned_v<T>);
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            bytes_.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
        }
    }

    void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }

    void name(const std::string& s) {
        if (s.size() > 0xFFFF) {
            throw EncodeError("name longer than 65535 bytes");
        }
        le(static_cast<std::uint16_t>(s.size()));
        raw(s.data(), s.size());
    }

    void dims(const std::vector<std::uint64_t>& shape) {
        if (shape.size() > 0xFF) {
            throw EncodeError("rank above 255");
        }
        le(static_cast<std::uint8_t>(shape.size()));
        for (auto d : shape) le(d);
    }

    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, const char* format)
        : bytes_(bytes), format_(format) {}

    std::size_t offset() const noexcept { return pos_; }
    bool at_end() const noexcept { return pos_ == bytes_.size(); }

    [[noreturn]] void fail(const std::string& what) const {
        throw FormatError(std::string(format_) + ": " + what + " at offset " +
                          std::to_string(pos_));
    }

    std::span<const std::uint8_t> take(std::uint64_t n) {
        if (n > bytes_.size() - pos_) {
            fail("truncated: need " + std::to_string(n) + " bytes, " +
                 std::to_string(bytes_.size() - pos_) + " left");
        }
        auto out = bytes_.subspan(pos_, static_cast<std::size_t>(n));
        pos_ += static_cast<std::size_t>(n);
        return out;
    }

    template <typename T>
    T le() {
        auto b = take(sizeof(T));
        T value = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            value |= static_cast<T>(static_cast<T>(b[i]) << (8 * i));
        }
        return value;
    }

    float f32() { return std::bit_cast<float>(le<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }

    std::string name() {
        const auto n = le<std::uint16_t>();
        auto b = take(n);
        return std::string(b.begin(), b.end());
    }

    std::vector<std::uint64_t> dims() {
        const auto rank = le<std::uint8_t>();
        std::vector<std::uint64_t> shape(rank);
        for (auto& d : shape) d = le<std::uint64_t>();
        return shape;
    }

    void magic(const char (&expected)[4]) {
        auto b = take(4);
        if (std::memcmp(b.data(), expected, 4) != 0) {
            pos_ -= 4;
            fail("bad magic");
        }
    }

private:
    std::span<const std::uint8_t> bytes_;
    const char* format_;
    std::size_t pos_ = 0;
};

// Product of dims, or nullopt-like max on overflow.
bool shape_product(const std::vector<std::uint64_t>& shape, std::uint64_t& out) {
    out = 1;
    for (auto d : shape) {
        if (d != 0 && out > std::numeric_limits<std::uint64_t>::max() / d) {
            return false;
        }
        out *= d;
    }
    return true;
}

}  // namespace

void TensorBundle::validate() const {
    std::set<std::string_view> seen;
    for (const auto& t : tensors) {
        if (t.name.empty()) {
            throw DataError("tensor with empty name");
        }
        if (!seen.insert(t.name).second) {
            throw DataError("duplicate tensor name '" + t.name + "'");
        }
        std::uint64_t n = 0;
        if (!shape_product(t.shape, n) || n != t.data.size()) {
            throw DataError("tensor '" + t.name + "': shape does not match data length " +
                            std::to_string(t.data.size()));
        }
    }
}

const Tensor* TensorBundle::find(std::string_view name) const {
    auto it = std::find_if(tensors.begin(), tensors.end(),
                           [&](const Tensor& t) { return t.name == name; });
    return it == tensors.end() ? nullptr : &*it;
}

std::uint64_t TensorBundle::element_count() const {
    std::uint64_t n = 0;
    for (const auto& t : tensors) n += t.data.size();
    return n;
}

void CompressedModel::validate() const {
    if (version != kVersion) {
        throw FormatError("unsupported HCMP version " + std::to_string(version));
    }
    std::set<std::string_view> seen;
    for (const auto& layer : layers) {
        if (layer.name.empty()) {
            throw FormatError("layer with empty name");
        }
        if (!seen.insert(layer.name).second) {
            throw FormatError("duplicate layer name '" + layer.name + "'");
        }
        std::uint64_t n = 0;
        if (!shape_product(layer.shape, n) || n != layer.element_count) {
            throw FormatError("layer '" + layer.name + "': shape disagrees with element count");
        }
        if (layer.padded != (layer.element_count % 2 == 1)) {
            throw FormatError("layer '" + layer.name + "': padded flag disagrees with element count");
        }
        if (layer.bit_width < 1 || layer.bit_width > 32) {
            throw FormatError("layer '" + layer.name + "': bit width outside [1, 32]");
        }
        try {
            layer.config.validate();
        } catch (const DomainError& e) {
            throw FormatError("layer '" + layer.name + "': " + e.what());
        }
        if (layer.payload.size() != packed_size(layer.group_count(), layer.bit_width)) {
            throw FormatError("layer '" + layer.name + "': payload length " +
                              std::to_string(layer.payload.size()) + " != expected " +
                              std::to_string(packed_size(layer.group_count(), layer.bit_width)));
        }
    }
}

const EncodedLayer* CompressedModel::find(std::string_view name) const {
    auto it = std::find_if(layers.begin(), layers.end(),
                           [&](const EncodedLayer& l) { return l.name == name; });
    return it == layers.end() ? nullptr : &*it;
}

std::vector<std::uint8_t> serialize_ntb(const TensorBundle& bundle) {
    bundle.validate();
    ByteWriter w;
    w.raw(kNtbMagic, 4);
    w.le(static_cast<std::uint32_t>(bundle.tensors.size()));
    for (const auto& t : bundle.tensors) {
        w.name(t.name);
        w.dims(t.shape);
        w.le(kDtypeF32);
        for (float v : t.data) w.f32(v);
    }
    return w.take();
}

TensorBundle parse_ntb(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "NTB");
    r.magic(kNtbMagic);
    const auto count = r.le<std::uint32_t>();
    TensorBundle bundle;
    std::set<std::string> seen;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::size_t at = r.offset();
        Tensor t;
        t.name = r.name();
        if (t.name.empty()) {
            throw FormatError("NTB: empty tensor name at offset " + std::to_string(at));
        }
        if (!seen.insert(t.name).second) {
            throw FormatError("NTB: duplicate tensor name '" + t.name + "' at offset " +
                              std::to_string(at));
        }
        t.shape = r.dims();
        const auto dtype = r.le<std::uint8_t>();
        if (dtype != kDtypeF32) {
            r.fail("unsupported dtype tag " + std::to_string(dtype));
        }
        std::uint64_t n = 0;
        if (!shape_product(t.shape, n) || n > (bytes.size() - r.offset()) / 4) {
            r.fail("truncated payload for tensor '" + t.name + "'");
        }
        t.data.resize(static_cast<std::size_t>(n));
        for (auto& v : t.data) v = r.f32();
        bundle.tensors.push_back(std::move(t));
    }
    if (!r.at_end()) {
        r.fail("trailing bytes");
    }
    return bundle;
}

std::vector<std::uint8_t> serialize_hcmp(const CompressedModel& model) {
    model.validate();
    ByteWriter w;
    w.raw(kHcmpMagic, 4);
    w.le(model.version);
    w.le(static_cast<std::uint32_t>(model.layers.size()));
    for (const auto& layer : model.layers) {
        const CodebookConfig& c = layer.config;
        w.name(layer.name);
        w.dims(layer.shape);
        w.le(layer.element_count);
        w.le(static_cast<std::uint8_t>(layer.padded ? 1 : 0));
        w.f64(c.side);
        w.le(c.index_bound);
        w.le(c.max_class);
        w.le(static_cast<std::uint8_t>(c.direction));
        w.f64(c.centroid.x);
        w.f64(c.centroid.y);
        w.f64(c.farthest);
        w.f64(layer.pad_value);
        w.le(layer.bit_width);
        w.le(static_cast<std::uint64_t>(layer.payload.size()));
        w.raw(layer.payload.data(), layer.payload.size());
    }
    return w.take();
}

CompressedModel parse_hcmp(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "HCMP");
    r.magic(kHcmpMagic);
    CompressedModel model;
    model.version = r.le<std::uint16_t>();
    if (model.version != CompressedModel::kVersion) {
        throw FormatError("HCMP: version mismatch: file has " + std::to_string(model.version) +
                          ", reader supports " + std::to_string(CompressedModel::kVersion));
    }
    const auto count = r.le<std::uint32_t>();
    for (std::uint32_t i = 0; i < count; ++i) {
        EncodedLayer layer;
        layer.name = r.name();
        layer.shape = r.dims();
        layer.element_count = r.le<std::uint64_t>();
        const auto padded = r.le<std::uint8_t>();
        if (padded > 1) {
            r.fail("padded flag must be 0 or 1");
        }
        layer.padded = padded == 1;
        CodebookConfig& c = layer.config;
        c.side = r.f64();
        c.index_bound = r.le<std::uint32_t>();
        c.max_class = r.le<std::uint16_t>();
        const auto dir = r.le<std::uint8_t>();
        if (dir > 1) {
            r.fail("unknown direction mode " + std::to_string(dir));
        }
        c.direction = static_cast<DirectionMode>(dir);
        c.centroid.x = r.f64();
        c.centroid.y = r.f64();
        c.farthest = r.f64();
        layer.pad_value = r.f64();
        layer.bit_width = r.le<std::uint8_t>();
        const auto len = r.le<std::uint64_t>();
        auto payload = r.take(len);
        layer.payload.assign(payload.begin(), payload.end());
        model.layers.push_back(std::move(layer));
    }
    if (!r.at_end()) {
        r.fail("trailing bytes");
    }
    model.validate();
    // Reject out-of-range indices up front rather than at decode time.
    for (const auto& layer : model.layers) {
        (void)layer.thetas();
    }
    return model;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("io", "cannot open '" + path.string() + "' for reading");
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw Error("io", "error reading '" + path.string() + "'");
    }
    return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("io", "cannot open '" + tmp.string() + "' for writing");
        }
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error("io", "error writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error("io", "cannot rename onto '" + path.string() + "'");
    }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
    write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                      text.size()));
}

void write_ntb(const std::filesystem::path& path, const TensorBundle& bundle) {
    write_file_atomic(path, serialize_ntb(bundle));
}

TensorBundle read_ntb(const std::filesystem::path& path) { return parse_ntb(read_file(path)); }

void write_hcmp(const std::filesystem::path& path, const CompressedModel& model) {
    write_file_atomic(path, serialize_hcmp(model));
}

CompressedModel read_hcmp(const std::filesystem::path& path) {
    return parse_hcmp(read_file(path));
}

}  // namespace hypc
