#pragma once

#include "CLI11.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace tempocont::cli {

/// Bad flags or inconsistent inputs; maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kManifestVersion = 1;

std::string to_text(double v);
std::string to_text(const std::string& v);
std::string to_text(bool v);
template <typename T>
    requires std::is_integral_v<T>
std::string to_text(T v) {
    return std::to_string(v);
}

/// A subcommand whose options are mirrored into its run manifest.
class Command {
public:
    Command(CLI::App& parent, const std::string& name, const std::string& description);
    virtual ~Command() = default;

    CLI::App* app() const { return app_; }
    const std::string& name() const { return name_; }
    virtual int run() = 0;

    /// Resolved `key=value` lines for every registered option.
    std::vector<std::pair<std::string, std::string>> resolved() const;

protected:
    template <typename T>
    CLI::Option* option(const std::string& key, T& var, const std::string& description) {
        fields_.push_back({key, [&var] { return to_text(var); }});
        return app_->add_option("--" + key, var, description);
    }
    CLI::Option* flag(const std::string& key, bool& var, const std::string& description);
    /// Registered option given on the command line or through --config.
    bool given(const std::string& key) const;
    std::uint64_t seed_ = 1;
    CLI::Option* seed_option(const std::string& description);

private:
    struct Field {
        std::string key;
        std::function<std::string()> value;
    };
    CLI::App* app_;
    std::string name_;
    std::vector<Field> fields_;
    std::string config_path_;
};

/// Expands `--config FILE` for the subcommand named in args[1]: every
/// key=value line becomes `--key=value`, placed before the user's own flags
/// so that flags win. `manifest.*` keys are metadata and skipped.
std::vector<std::string> expand_config(const std::vector<std::string>& args, const CLI::App& app);

/// Writes `<output>.manifest` atomically.
void write_manifest(const std::string& output, const Command& command, double seconds,
                    const std::vector<std::pair<std::string, std::string>>& extra);

std::vector<double> parse_double_list(const std::string& text, const std::string& what);
std::vector<std::uint64_t> parse_uint_list(const std::string& text, const std::string& what);
std::uint64_t parse_seed(const std::string& text, const std::string& what);

/// CSV text with a fixed header; fields are joined with commas.
class Csv {
public:
    explicit Csv(const std::string& header) { text_ = header + "\n"; }
    template <typename... Ts>
    void row(const Ts&... fields) {
        std::string line;
        ((line += (line.empty() ? "" : ",") + to_text(fields)), ...);
        text_ += line + "\n";
    }
    const std::string& str() const { return text_; }

private:
    std::string text_;
};

} // namespace tempocont::cli
