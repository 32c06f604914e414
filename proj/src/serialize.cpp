#include "mcbn/serialize.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace mcbn {
namespace {

using nlohmann::json;

json encode_vec(const std::vector<double>& v) {
    json arr = json::array();
    for (double x : v) arr.push_back(double_to_hex(x));
    return arr;
}

std::vector<double> decode_vec(const json& arr) {
    std::vector<double> v;
    v.reserve(arr.size());
    for (const auto& s : arr) v.push_back(hex_to_double(s.get<std::string>()));
    return v;
}

}  // namespace

std::string double_to_hex(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 0; i < 16; ++i) out[15 - i] = digits[(bits >> (4 * i)) & 0xF];
    return out;
}

double hex_to_double(const std::string& s) {
    if (s.size() != 16) throw std::invalid_argument("hex_to_double: expected 16 hex digits");
    std::uint64_t bits = 0;
    for (char c : s) {
        bits <<= 4;
        if (c >= '0' && c <= '9')
            bits |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f')
            bits |= static_cast<std::uint64_t>(c - 'a' + 10);
        else if (c >= 'A' && c <= 'F')
            bits |= static_cast<std::uint64_t>(c - 'A' + 10);
        else
            throw std::invalid_argument("hex_to_double: invalid hex digit");
    }
    return std::bit_cast<double>(bits);
}

std::string network_to_json(const Network& net) {
    json doc;
    doc["format"] = "mcbn-network";
    doc["version"] = 1;
    doc["input_width"] = net.input_width;
    json layers = json::array();
    for (const auto& layer : net.layers) {
        json l;
        if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            l["type"] = "dense";
            l["out"] = d->W.rows();
            l["in"] = d->W.cols();
            l["W"] = encode_vec(d->W.storage());
            l["b"] = encode_vec(d->b);
        } else if (const auto* bn = std::get_if<BNLayer>(&layer)) {
            l["type"] = "batch_norm";
            l["gamma"] = encode_vec(bn->gamma);
            l["beta"] = encode_vec(bn->beta);
            l["pop_mean"] = encode_vec(bn->pop_mean);
            l["pop_var"] = encode_vec(bn->pop_var);
            l["eps"] = double_to_hex(bn->eps);
            l["affine"] = bn->affine;
        } else if (const auto* dr = std::get_if<DropoutLayer>(&layer)) {
            l["type"] = "dropout";
            l["rate"] = double_to_hex(dr->rate);
        } else {
            const auto& act = std::get<ActivationLayer>(layer);
            l["type"] = "activation";
            l["kind"] = act.kind == Activation::ReLU ? "relu" : "identity";
        }
        layers.push_back(std::move(l));
    }
    doc["layers"] = std::move(layers);
    return doc.dump(2);
}

Network network_from_json(const std::string& json_text) {
    const json doc = json::parse(json_text);
    if (doc.at("format").get<std::string>() != "mcbn-network")
        throw std::invalid_argument("network_from_json: not a network document");
    if (doc.at("version").get<int>() != 1)
        throw std::invalid_argument("network_from_json: unsupported version");
    Network net;
    net.input_width = doc.at("input_width").get<std::size_t>();
    for (const auto& l : doc.at("layers")) {
        const std::string type = l.at("type").get<std::string>();
        if (type == "dense") {
            DenseLayer d;
            const auto out = l.at("out").get<std::size_t>();
            const auto in = l.at("in").get<std::size_t>();
            d.W = Matrix(out, in, decode_vec(l.at("W")));
            d.b = decode_vec(l.at("b"));
            net.layers.emplace_back(std::move(d));
        } else if (type == "batch_norm") {
            BNLayer bn;
            bn.gamma = decode_vec(l.at("gamma"));
            bn.beta = decode_vec(l.at("beta"));
            bn.pop_mean = decode_vec(l.at("pop_mean"));
            bn.pop_var = decode_vec(l.at("pop_var"));
            bn.eps = hex_to_double(l.at("eps").get<std::string>());
            bn.affine = l.at("affine").get<bool>();
            net.layers.emplace_back(std::move(bn));
        } else if (type == "dropout") {
            net.layers.emplace_back(DropoutLayer{hex_to_double(l.at("rate").get<std::string>())});
        } else if (type == "activation") {
            const std::string kind = l.at("kind").get<std::string>();
            net.layers.emplace_back(ActivationLayer{
                kind == "relu" ? Activation::ReLU : Activation::Identity});
        } else {
            throw std::invalid_argument("network_from_json: unknown layer type " + type);
        }
    }
    net.validate();
    return net;
}

void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_network: cannot open " + path);
    out << network_to_json(net) << '\n';
}

Network load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_network: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return network_from_json(text);
}

}  // namespace mcbn
