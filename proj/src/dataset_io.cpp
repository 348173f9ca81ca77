#include "tempocont/error.hpp"
#include "tempocont/synth.hpp"
#include "tempocont/text.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace tempocont {

namespace {

constexpr std::string_view kMagic = "tempocont-dataset";

void write_set(std::ostream& out, const char* name, const std::vector<SampleSequence>& seqs) {
    for (const auto& s : seqs)
        for (std::size_t t = 0; t < s.size(); ++t) {
            const auto c = static_cast<Eigen::Index>(t);
            out << name << ',' << s.id << ',' << s.frames[t] << ',' << int(s.labeled[t]) << ','
                << text::format_double(s.truth(0, c)) << ',' << text::format_double(s.truth(1, c));
            for (Eigen::Index k = 0; k < s.features.rows(); ++k) out << ',' << text::format_double(s.features(k, c));
            out << '\n';
        }
}

// Column-wise accumulation before the sequence is packed into matrices.
struct PendingSequence {
    std::int64_t id = 0;
    std::vector<std::int64_t> frames;
    std::vector<double> features;
    std::vector<double> truth;
    std::vector<std::uint8_t> labeled;

    SampleSequence pack(Eigen::Index d) const {
        SampleSequence s;
        s.id = id;
        s.frames = frames;
        s.labeled = labeled;
        const auto n = static_cast<Eigen::Index>(frames.size());
        s.features = Eigen::Map<const Eigen::MatrixXd>(features.data(), d, n);
        s.truth = Eigen::Map<const Eigen::Matrix2Xd>(truth.data(), 2, n);
        return s;
    }
};

} // namespace

void write_dataset(std::ostream& out, const Dataset& dataset) {
    out << kMagic << " v" << kDatasetVersion << " feature_dim=" << dataset.feature_dim << '\n';
    write_set(out, "train", dataset.train);
    write_set(out, "val", dataset.val);
}

Dataset read_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty dataset file", 1);
    const std::string prefix = std::string(kMagic) + " v" + std::to_string(kDatasetVersion) + " feature_dim=";
    if (line.rfind(prefix, 0) != 0) throw ParseError("expected '" + prefix + "<d>' header", 1);
    Dataset ds;
    ds.feature_dim = static_cast<Eigen::Index>(text::parse_uint(std::string_view(line).substr(prefix.size()), 1));
    if (ds.feature_dim < 1) throw ParseError("feature_dim must be >= 1", 1);
    const auto d = static_cast<std::size_t>(ds.feature_dim);

    std::vector<PendingSequence> pending[2];
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (text::trim(line).empty()) continue;
        const auto f = text::split(line, ',');
        if (f.size() != 6 + d)
            throw ParseError("expected " + std::to_string(6 + d) + " fields, got " + std::to_string(f.size()), number);
        int set;
        if (f[0] == "train")
            set = 0;
        else if (f[0] == "val")
            set = 1;
        else
            throw ParseError("unknown set '" + std::string(f[0]) + "'", number);
        const auto id = text::parse_int(f[1], number);
        const auto frame = text::parse_int(f[2], number);
        const auto flag = text::parse_uint(f[3], number);
        if (flag > 1) throw ParseError("label flag must be 0 or 1", number);

        auto& seqs = pending[set];
        if (seqs.empty() || seqs.back().id != id) {
            for (const auto& other : pending[0])
                if (other.id == id) throw ParseError("records of sequence " + std::to_string(id) + " are not contiguous", number);
            for (const auto& other : pending[1])
                if (other.id == id) throw ParseError("records of sequence " + std::to_string(id) + " are not contiguous", number);
            seqs.push_back({});
            seqs.back().id = id;
        }
        auto& s = seqs.back();
        if (!s.frames.empty() && frame <= s.frames.back()) throw ParseError("frames must strictly increase", number);
        s.frames.push_back(frame);
        s.labeled.push_back(static_cast<std::uint8_t>(flag));
        s.truth.push_back(text::parse_double(f[4], number));
        s.truth.push_back(text::parse_double(f[5], number));
        for (std::size_t k = 0; k < d; ++k) s.features.push_back(text::parse_double(f[6 + k], number));
    }
    if (in.bad()) throw IoError("read error in dataset file");

    for (const auto& p : pending[0]) ds.train.push_back(p.pack(ds.feature_dim));
    for (const auto& p : pending[1]) ds.val.push_back(p.pack(ds.feature_dim));
    return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset) {
    std::ostringstream out;
    write_dataset(out, dataset);
    text::write_file_atomic(path.string(), out.str());
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
    return read_dataset(in);
}

} // namespace tempocont
