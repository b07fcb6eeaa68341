#include "falcon/tensor_io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace falcon {
namespace {

constexpr char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

float f32_from_le(const unsigned char* p) {
    std::uint32_t bits = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
                         std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
    return std::bit_cast<float>(bits);
}

void f32_to_le(float value, unsigned char* p) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(value);
    p[0] = static_cast<unsigned char>(bits & 0xff);
    p[1] = static_cast<unsigned char>((bits >> 8) & 0xff);
    p[2] = static_cast<unsigned char>((bits >> 16) & 0xff);
    p[3] = static_cast<unsigned char>((bits >> 24) & 0xff);
}

// Extracts the value following "'key':" in the header dict.
std::string header_field(const std::string& header, const std::string& key) {
    std::string needle = "'" + key + "':";
    std::size_t pos = header.find(needle);
    if (pos == std::string::npos)
        throw Error(ErrorKind::BadMagic, "npy header missing field '" + key + "'");
    pos += needle.size();
    while (pos < header.size() && std::isspace(static_cast<unsigned char>(header[pos]))) ++pos;
    if (pos >= header.size())
        throw Error(ErrorKind::BadMagic, "npy header truncated after '" + key + "'");
    if (header[pos] == '\'') {
        std::size_t end = header.find('\'', pos + 1);
        if (end == std::string::npos)
            throw Error(ErrorKind::BadMagic, "npy header has unterminated string");
        return header.substr(pos + 1, end - pos - 1);
    }
    if (header[pos] == '(') {
        std::size_t end = header.find(')', pos);
        if (end == std::string::npos)
            throw Error(ErrorKind::BadMagic, "npy header has unterminated tuple");
        return header.substr(pos, end - pos + 1);
    }
    std::size_t end = pos;
    while (end < header.size() && header[end] != ',' && header[end] != '}') ++end;
    std::string raw = header.substr(pos, end - pos);
    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.pop_back();
    return raw;
}

std::vector<std::size_t> parse_shape(const std::string& tuple) {
    std::vector<std::size_t> shape;
    std::string body = tuple.substr(1, tuple.size() - 2);
    std::size_t i = 0;
    while (i < body.size()) {
        while (i < body.size() &&
               (std::isspace(static_cast<unsigned char>(body[i])) || body[i] == ','))
            ++i;
        if (i >= body.size()) break;
        if (!std::isdigit(static_cast<unsigned char>(body[i])))
            throw Error(ErrorKind::BadMagic, "npy shape tuple is not numeric");
        std::size_t value = 0;
        while (i < body.size() && std::isdigit(static_cast<unsigned char>(body[i]))) {
            value = value * 10 + static_cast<std::size_t>(body[i] - '0');
            ++i;
        }
        if (value == 0)
            throw Error(ErrorKind::InvariantViolation, "npy shape has a zero-sized dimension");
        shape.push_back(value);
    }
    return shape;
}

} // namespace

Tensor read_npy(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::MissingFile, "cannot open '" + path + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad())
        throw Error(ErrorKind::IoFailure, "read failed for '" + path + "'");

    if (bytes.size() < 10 || std::memcmp(bytes.data(), kMagic, 6) != 0)
        throw Error(ErrorKind::BadMagic, "'" + path + "' is not an npy file");
    if (bytes[6] != 1 || bytes[7] != 0)
        throw Error(ErrorKind::BadMagic, "unsupported npy format version");

    std::size_t header_len = std::size_t(bytes[8]) | std::size_t(bytes[9]) << 8;
    if (bytes.size() < 10 + header_len)
        throw Error(ErrorKind::TruncatedPayload, "npy header extends past end of file");
    std::string header(reinterpret_cast<const char*>(bytes.data()) + 10, header_len);

    std::string descr = header_field(header, "descr");
    if (descr != "<f4")
        throw Error(ErrorKind::UnsupportedDtype, "dtype '" + descr + "' (only '<f4' is supported)");
    std::string fortran = header_field(header, "fortran_order");
    if (fortran == "True")
        throw Error(ErrorKind::FortranOrderUnsupported, "column-major payloads are not supported");
    if (fortran != "False")
        throw Error(ErrorKind::BadMagic, "npy fortran_order is not a boolean");

    Tensor tensor;
    tensor.shape = parse_shape(header_field(header, "shape"));
    std::size_t count = tensor.size();
    std::size_t payload = bytes.size() - 10 - header_len;
    if (payload < count * 4)
        throw Error(ErrorKind::TruncatedPayload,
                    "expected " + std::to_string(count * 4) + " payload bytes, found " +
                        std::to_string(payload));
    if (payload > count * 4)
        throw Error(ErrorKind::TruncatedPayload,
                    "payload has " + std::to_string(payload - count * 4) + " trailing bytes");

    tensor.data.resize(count);
    const unsigned char* p = bytes.data() + 10 + header_len;
    for (std::size_t i = 0; i < count; ++i) tensor.data[i] = f32_from_le(p + i * 4);
    return tensor;
}

void write_npy(const std::string& path, const Tensor& tensor) {
    if (tensor.data.size() != tensor.size())
        throw Error(ErrorKind::InvariantViolation, "tensor payload does not match its shape");
    for (std::size_t d : tensor.shape)
        if (d == 0)
            throw Error(ErrorKind::InvariantViolation, "tensor shape has a zero-sized dimension");

    std::ostringstream dict;
    dict << "{'descr': '<f4', 'fortran_order': False, 'shape': (";
    for (std::size_t i = 0; i < tensor.shape.size(); ++i) {
        dict << tensor.shape[i];
        if (tensor.shape.size() == 1 || i + 1 < tensor.shape.size()) dict << ",";
        if (i + 1 < tensor.shape.size()) dict << " ";
    }
    dict << "), }";
    std::string header = dict.str();
    std::size_t total = 10 + header.size() + 1; // trailing newline
    std::size_t padded = (total + 63) / 64 * 64;
    header.append(padded - total, ' ');
    header.push_back('\n');

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::IoFailure, "cannot create '" + path + "'");
    out.write(kMagic, 6);
    unsigned char prefix[4] = {1, 0, static_cast<unsigned char>(header.size() & 0xff),
                               static_cast<unsigned char>(header.size() >> 8)};
    out.write(reinterpret_cast<const char*>(prefix), 4);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    std::vector<unsigned char> payload(tensor.data.size() * 4);
    for (std::size_t i = 0; i < tensor.data.size(); ++i)
        f32_to_le(tensor.data[i], payload.data() + i * 4);
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    if (!out)
        throw Error(ErrorKind::IoFailure, "write failed for '" + path + "'");
}

void write_pgm(const std::string& path, const std::vector<int>& labels,
               std::size_t height, std::size_t width) {
    if (height == 0 || width == 0 || labels.size() != height * width)
        throw Error(ErrorKind::ShapeMismatch, "label grid does not match " +
                                                  std::to_string(height) + "x" +
                                                  std::to_string(width));
    for (int v : labels)
        if (v < 0 || v > 255)
            throw Error(ErrorKind::LabelOverflow,
                        "label " + std::to_string(v) + " does not fit 8-bit grayscale");

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorKind::IoFailure, "cannot create '" + path + "'");
    out << "P5\n" << width << " " << height << "\n255\n";
    std::vector<unsigned char> row(width);
    for (std::size_t h = 0; h < height; ++h) {
        for (std::size_t w = 0; w < width; ++w)
            row[w] = static_cast<unsigned char>(labels[h * width + w]);
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(width));
    }
    if (!out)
        throw Error(ErrorKind::IoFailure, "write failed for '" + path + "'");
}

void validate_config(const PipelineConfig& config) {
    auto fail = [](const std::string& field, const std::string& why) {
        throw Error(ErrorKind::InvariantViolation, field + " " + why);
    };
    if (config.k_clusters < 2) fail("k_clusters", "must be >= 2");
    if (!(config.alpha_power > 0)) fail("alpha_power", "must be > 0");
    if (!(config.lambda_affinity >= 0)) fail("lambda_affinity", "must be >= 0");
    if (!(config.beta_reweight >= 0)) fail("beta_reweight", "must be >= 0");
    if (config.t_cuts < 0) fail("t_cuts", "must be >= 0");
    if (!(config.epsilon > 0)) fail("epsilon", "must be > 0");
    if (!(config.softmax_temperature > 0)) fail("softmax_temperature", "must be > 0");
    if (!(config.eta_std > 0)) fail("eta_std", "must be > 0");
    if (!(config.lambda_elu >= 0)) fail("lambda_elu", "must be >= 0");
    if (!(config.alpha_rgb >= 0)) fail("alpha_rgb", "must be >= 0");
    if (!(config.alpha_depth >= 0)) fail("alpha_depth", "must be >= 0");
    if (config.t_ref < 0) fail("t_ref", "must be >= 0");
    if (!(config.objective_tol >= 0)) fail("objective_tol", "must be >= 0");
    if (config.t_ref > 0 && !(config.alpha_rgb + config.alpha_depth > 0))
        fail("alpha_rgb", "+ alpha_depth must be > 0 when t_ref > 0");
}

PipelineConfig parse_config(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedJson, e.what());
    }
    if (!doc.is_object())
        throw Error(ErrorKind::MalformedJson, "config root must be a JSON object");

    PipelineConfig config;
    auto get_int = [](const nlohmann::json& v, const std::string& field) -> long long {
        if (!v.is_number_integer())
            throw Error(ErrorKind::InvariantViolation, field + " must be an integer");
        return v.get<long long>();
    };
    auto get_real = [](const nlohmann::json& v, const std::string& field) -> double {
        if (!v.is_number())
            throw Error(ErrorKind::InvariantViolation, field + " must be a number");
        return v.get<double>();
    };

    for (const auto& [key, value] : doc.items()) {
        if (key == "k_clusters") config.k_clusters = static_cast<int>(get_int(value, key));
        else if (key == "alpha_power") config.alpha_power = get_real(value, key);
        else if (key == "lambda_affinity") config.lambda_affinity = get_real(value, key);
        else if (key == "beta_reweight") config.beta_reweight = get_real(value, key);
        else if (key == "t_cuts") config.t_cuts = static_cast<int>(get_int(value, key));
        else if (key == "epsilon") config.epsilon = get_real(value, key);
        else if (key == "seed") config.seed = static_cast<std::uint64_t>(get_int(value, key));
        else if (key == "softmax_temperature") config.softmax_temperature = get_real(value, key);
        else if (key == "eta_std") config.eta_std = get_real(value, key);
        else if (key == "lambda_elu") config.lambda_elu = get_real(value, key);
        else if (key == "alpha_rgb") config.alpha_rgb = get_real(value, key);
        else if (key == "alpha_depth") config.alpha_depth = get_real(value, key);
        else if (key == "t_ref") config.t_ref = static_cast<int>(get_int(value, key));
        else if (key == "objective_tol") config.objective_tol = get_real(value, key);
        else throw Error(ErrorKind::InvariantViolation, "unknown config field '" + key + "'");
    }
    validate_config(config);
    return config;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::MissingFile, "cannot open '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    if (in.bad())
        throw Error(ErrorKind::IoFailure, "read failed for '" + path + "'");
    return parse_config(text.str());
}

} // namespace falcon
