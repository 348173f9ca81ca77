#include "tempocont/regressor.hpp"

#include "tempocont/text.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace tempocont {

void RegressorConfig::validate() const {
    if (input_dim < 1) throw InvalidArgument("regressor: input_dim must be >= 1");
    for (auto h : hidden_dims)
        if (h < 1) throw InvalidArgument("regressor: hidden layer of zero width");
    if (!std::isfinite(init_scale) || init_scale < 0.0) throw InvalidArgument("regressor: init_scale must be >= 0");
}

std::vector<Eigen::Index> RegressorConfig::layer_dims() const {
    std::vector<Eigen::Index> dims{input_dim};
    dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
    dims.push_back(output_dim);
    return dims;
}

std::string to_string(Activation a) { return a == Activation::tanh ? "tanh" : "relu"; }

Activation parse_activation(const std::string& s) {
    if (s == "tanh") return Activation::tanh;
    if (s == "relu") return Activation::relu;
    throw InvalidArgument("unknown activation '" + s + "'");
}

namespace {

constexpr std::string_view kMagic = "tempocont-checkpoint";

void write_array(std::ostream& out, const char* tag, std::size_t layer, const double* data, Eigen::Index rows,
                 Eigen::Index cols) {
    out << tag << ' ' << layer << ' ' << rows << ' ' << cols;
    for (Eigen::Index i = 0; i < rows * cols; ++i) out << ' ' << text::format_double(data[i]);
    out << '\n';
}

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    std::string next(const char* expecting) {
        std::string line;
        if (!std::getline(in_, line)) throw ParseError(std::string("truncated checkpoint: expected ") + expecting, 0);
        ++number_;
        return line;
    }

    std::string value(std::string_view key) {
        const auto line = next(std::string(key).c_str());
        const auto eq = line.find('=');
        if (eq == std::string::npos || std::string_view(line).substr(0, eq) != key)
            throw ParseError("expected '" + std::string(key) + "=...'", number_);
        return line.substr(eq + 1);
    }

    std::size_t number() const { return number_; }

private:
    std::istream& in_;
    std::size_t number_ = 0;
};

void read_array(LineReader& reader, const char* tag, std::size_t layer, double* data, Eigen::Index rows,
                Eigen::Index cols) {
    const auto line = reader.next(tag);
    const auto n = reader.number();
    std::vector<std::string_view> tok;
    for (auto t : text::split(line, ' '))
        if (!t.empty()) tok.push_back(t);
    if (tok.size() < 4 || tok[0] != tag) throw ParseError(std::string("expected '") + tag + "' record", n);
    if (text::parse_uint(tok[1], n) != layer || text::parse_int(tok[2], n) != rows ||
        text::parse_int(tok[3], n) != cols)
        throw ParseError("array shape does not match the declared configuration", n);
    if (static_cast<Eigen::Index>(tok.size()) != 4 + rows * cols)
        throw ParseError("expected " + std::to_string(rows * cols) + " values", n);
    for (Eigen::Index i = 0; i < rows * cols; ++i) data[i] = text::parse_double(tok[4 + static_cast<std::size_t>(i)], n);
}

} // namespace

void write_checkpoint(std::ostream& out, const RegressorParams& params) {
    const auto& c = params.config;
    out << kMagic << " v" << kCheckpointVersion << '\n';
    out << "scalar=f64\n";
    out << "input_dim=" << c.input_dim << '\n';
    out << "hidden_dims=";
    for (std::size_t i = 0; i < c.hidden_dims.size(); ++i) out << (i ? "," : "") << c.hidden_dims[i];
    out << '\n';
    out << "activation=" << to_string(c.activation) << '\n';
    out << "init_scale=" << text::format_double(c.init_scale) << '\n';
    out << "seed=" << c.seed << '\n';
    out << "layers=" << params.layers() << '\n';
    for (std::size_t l = 0; l < params.layers(); ++l) {
        write_array(out, "weight", l, params.weights[l].data(), params.weights[l].rows(), params.weights[l].cols());
        write_array(out, "bias", l, params.biases[l].data(), params.biases[l].rows(), 1);
    }
}

RegressorParams read_checkpoint(std::istream& in) {
    LineReader reader(in);
    const auto header = reader.next("header");
    if (header != std::string(kMagic) + " v" + std::to_string(kCheckpointVersion))
        throw ParseError("not a v" + std::to_string(kCheckpointVersion) + " checkpoint header", 1);
    if (reader.value("scalar") != "f64") throw ParseError("unsupported scalar type", reader.number());

    RegressorConfig c;
    c.input_dim = text::parse_int(reader.value("input_dim"), reader.number());
    c.hidden_dims.clear();
    const auto hidden = reader.value("hidden_dims");
    if (!hidden.empty())
        for (auto t : text::split(hidden, ',')) c.hidden_dims.push_back(text::parse_int(t, reader.number()));
    try {
        c.activation = parse_activation(reader.value("activation"));
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what(), reader.number());
    }
    c.init_scale = text::parse_double(reader.value("init_scale"), reader.number());
    c.seed = text::parse_uint(reader.value("seed"), reader.number());
    try {
        c.validate();
    } catch (const InvalidArgument& e) {
        throw ParseError(e.what(), reader.number());
    }

    auto params = RegressorParams::zeros(c);
    if (text::parse_uint(reader.value("layers"), reader.number()) != params.layers())
        throw ParseError("layer count does not match hidden_dims", reader.number());
    for (std::size_t l = 0; l < params.layers(); ++l) {
        auto& w = params.weights[l];
        auto& b = params.biases[l];
        read_array(reader, "weight", l, w.data(), w.rows(), w.cols());
        read_array(reader, "bias", l, b.data(), b.rows(), 1);
    }
    return params;
}

void save_checkpoint(const std::filesystem::path& path, const RegressorParams& params) {
    std::ostringstream out;
    write_checkpoint(out, params);
    text::write_file_atomic(path.string(), out.str());
}

RegressorParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
    return read_checkpoint(in);
}

} // namespace tempocont
