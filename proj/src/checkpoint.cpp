#include "rrn/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace rrn {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    } else {
        return v;
    }
}

void put_u64(std::string& out, std::uint64_t v) {
    v = to_little(v);
    out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_doubles(std::string& out, const double* data, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double v = to_little(data[i]);
        out.append(reinterpret_cast<const char*>(&v), sizeof v);
    }
}

double get_double(const char* p) {
    double v;
    std::memcpy(&v, p, sizeof v);
    return to_little(v);
}

std::size_t payload_bytes(const layer_spec& spec) {
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l)
        n += static_cast<std::size_t>(spec.widths[l]) * spec.widths[l + 1] + spec.widths[l + 1];
    return n * sizeof(double);
}

} // namespace

void save_checkpoint(const std::filesystem::path& path, const network_params& params, int step,
                     const nlohmann::json& metadata) {
    nlohmann::json header = metadata.is_object() ? metadata : nlohmann::json::object();
    header["widths"] = params.spec.widths;
    header["activation"] = std::string(activation_name(params.spec.act));
    header["step"] = step;
    const std::string text = header.dump();

    std::string out(checkpoint_magic, sizeof checkpoint_magic);
    put_u64(out, text.size());
    out += text;
    for (const auto& layer : params.layers) {
        // row-major fan_in x fan_out
        const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = layer.weights;
        put_doubles(out, w.data(), static_cast<std::size_t>(w.size()));
        put_doubles(out, layer.bias.data(), static_cast<std::size_t>(layer.bias.size()));
    }

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw checkpoint_error("cannot open " + path.string() + " for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw checkpoint_error("short write to " + path.string());
}

checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<layer_spec>& expected) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw checkpoint_error("cannot open " + path.string());
    const std::string bytes{std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
    const std::string name = path.string();

    if (bytes.size() < 16 || std::memcmp(bytes.data(), checkpoint_magic, sizeof checkpoint_magic) != 0)
        throw corrupt_header_error(name + ": missing checkpoint magic");
    std::uint64_t header_len;
    std::memcpy(&header_len, bytes.data() + 8, sizeof header_len);
    header_len = to_little(header_len);
    if (header_len > bytes.size() - 16) throw corrupt_header_error(name + ": metadata length exceeds file size");

    checkpoint ck;
    try {
        ck.metadata = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(header_len));
        ck.params.spec.widths = ck.metadata.at("widths").get<std::vector<int>>();
        ck.params.spec.act = parse_activation(ck.metadata.at("activation").get<std::string>());
        ck.step = ck.metadata.at("step").get<int>();
        ck.params.spec.validate();
    } catch (const std::exception& e) {
        throw corrupt_header_error(name + ": bad metadata header: " + e.what());
    }

    const layer_spec& spec = ck.params.spec;
    if (expected) {
        const std::size_t n = std::max(spec.widths.size(), expected->widths.size()) - 1;
        for (std::size_t l = 0; l < n; ++l) {
            auto dims = [l](const layer_spec& s) {
                return l + 1 < s.widths.size() ? std::pair{s.widths[l], s.widths[l + 1]} : std::pair{0, 0};
            };
            if (dims(spec) != dims(*expected)) {
                const layer_spec& named = l + 1 < expected->widths.size() ? *expected : spec;
                throw shape_error(name + ": layer " + std::to_string(l) + " (" + named.weight_layer_name(l) +
                                  ") is " + std::to_string(dims(spec).first) + "x" + std::to_string(dims(spec).second) +
                                  ", expected " + std::to_string(dims(*expected).first) + "x" +
                                  std::to_string(dims(*expected).second));
            }
        }
    }

    const std::size_t offset = 16 + header_len;
    const std::size_t want = payload_bytes(spec);
    const std::size_t have = bytes.size() - offset;
    if (have < want)
        throw truncated_payload_error(name + ": payload length " + std::to_string(have) + " bytes, expected " +
                                      std::to_string(want));
    if (have > want)
        throw checkpoint_error(name + ": " + std::to_string(have - want) + " trailing bytes after payload");

    const char* p = bytes.data() + offset;
    for (std::size_t l = 0; l + 1 < spec.widths.size(); ++l) {
        const int fan_in = spec.widths[l], fan_out = spec.widths[l + 1];
        dense_layer layer{Eigen::MatrixXd(fan_in, fan_out), Eigen::VectorXd(fan_out)};
        for (int i = 0; i < fan_in; ++i)
            for (int j = 0; j < fan_out; ++j, p += sizeof(double)) layer.weights(i, j) = get_double(p);
        for (int j = 0; j < fan_out; ++j, p += sizeof(double)) layer.bias(j) = get_double(p);
        ck.params.layers.push_back(std::move(layer));
    }
    return ck;
}

} // namespace rrn
