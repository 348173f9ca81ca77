#include "cli_support.hpp"

#include "tempocont/error.hpp"
#include "tempocont/regressor.hpp"
#include "tempocont/synth.hpp"
#include "tempocont/text.hpp"

#include <fstream>
#include <map>

namespace tempocont::cli {

std::string to_text(double v) { return text::format_double(v); }
std::string to_text(const std::string& v) { return v; }
std::string to_text(bool v) { return v ? "true" : "false"; }

Command::Command(CLI::App& parent, const std::string& name, const std::string& description)
    : app_(parent.add_subcommand(name, description)), name_(name) {
    app_->add_option("--config", config_path_, "key=value file; flags given on the command line win");
}

CLI::Option* Command::flag(const std::string& key, bool& var, const std::string& description) {
    fields_.push_back({key, [&var] { return to_text(var); }});
    return app_->add_flag("--" + key, var, description);
}

CLI::Option* Command::seed_option(const std::string& description) {
    return option("seed", seed_, description)->envname("TEMPOCONT_SEED");
}

bool Command::given(const std::string& key) const { return app_->get_option("--" + key)->count() > 0; }

std::vector<std::pair<std::string, std::string>> Command::resolved() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : fields_) {
        auto v = f.value();
        if (!v.empty()) out.emplace_back(f.key, std::move(v));
    }
    return out;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args, const CLI::App& app) {
    if (args.size() < 2) return args;
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands([](const CLI::App*) { return true; }))
        if (s->get_name() == args[1]) sub = s;
    if (!sub) return args;

    std::string path;
    for (std::size_t i = 2; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;

    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::vector<std::string> injected;
    std::map<std::string, std::size_t> seen;
    std::string line;
    for (std::size_t number = 1; std::getline(in, line); ++number) {
        const auto body = text::trim(std::string_view(line).substr(0, line.find('#')));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        const std::string where = path + ":" + std::to_string(number) + ": ";
        if (eq == std::string_view::npos) throw UsageError(where + "expected key=value");
        const std::string key(text::trim(body.substr(0, eq)));
        const std::string value(text::trim(body.substr(eq + 1)));
        if (seen.contains(key))
            throw UsageError(where + "duplicate key '" + key + "' (first on line " + std::to_string(seen[key]) + ")");
        seen[key] = number;
        if (key == "manifest.command") {
            if (value != args[1])
                throw UsageError(where + "manifest was written by '" + value + "', not '" + args[1] + "'");
            continue;
        }
        if (key.rfind("manifest.", 0) == 0) continue;
        if (key == "config" || !sub->get_option_no_throw("--" + key))
            throw UsageError(where + "unknown key '" + key + "' for " + args[1]);
        injected.push_back("--" + key + "=" + value);
    }
    std::vector<std::string> out{args[0], args[1]};
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), args.begin() + 2, args.end());
    return out;
}

void write_manifest(const std::string& output, const Command& command, double seconds,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
    std::string s = "# tempocont run manifest; replay with: tempocont " + command.name() + " --config <this file>\n";
    s += "manifest.command=" + command.name() + "\n";
    s += "manifest.version=" + std::to_string(kManifestVersion) + "\n";
    s += "manifest.dataset_format=" + std::to_string(kDatasetVersion) + "\n";
    s += "manifest.checkpoint_format=" + std::to_string(kCheckpointVersion) + "\n";
    s += "manifest.duration_seconds=" + text::format_double(seconds) + "\n";
    for (const auto& [k, v] : extra) s += "manifest." + k + "=" + v + "\n";
    for (const auto& [k, v] : command.resolved()) s += k + "=" + v + "\n";
    text::write_file_atomic(output + ".manifest", s);
}

std::vector<double> parse_double_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    try {
        for (auto tok : text::split(text, ',')) out.push_back(text::parse_double(text::trim(tok)));
    } catch (const ParseError& e) {
        throw UsageError("--" + what + ": " + e.what());
    }
    return out;
}

std::vector<std::uint64_t> parse_uint_list(const std::string& text, const std::string& what) {
    std::vector<std::uint64_t> out;
    try {
        for (auto tok : text::split(text, ',')) out.push_back(text::parse_uint(text::trim(tok)));
    } catch (const ParseError& e) {
        throw UsageError("--" + what + ": " + e.what());
    }
    return out;
}

std::uint64_t parse_seed(const std::string& text, const std::string& what) {
    const auto v = parse_uint_list(text, what);
    if (v.size() != 1) throw UsageError("--" + what + ": expected a single integer");
    return v[0];
}

} // namespace tempocont::cli
