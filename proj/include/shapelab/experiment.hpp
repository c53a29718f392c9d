#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "shapelab/augmented.hpp"
#include "shapelab/competition.hpp"
#include "shapelab/estimators.hpp"
#include "shapelab/geodesics.hpp"
#include "shapelab/heisenberg.hpp"
#include "shapelab/io.hpp"
#include "shapelab/shape.hpp"

namespace shapelab {

inline constexpr const char* kToolVersion = "shapelab 1.0.0";

/// Parsed run specification: a flat key/value view of the spec file with
/// section-qualified keys ("sim.radius"), plus the raw text for echoing.
class experiment_spec {
   public:
    static experiment_spec parse(const std::string& text) {
        experiment_spec spec;
        spec.raw_text_ = text;
        spec.hash_ = detail::fnv1a_text(text);
        std::istringstream in(text);
        std::string line, section;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash_pos = line.find('#');
            if (hash_pos != std::string::npos) line.resize(hash_pos);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw spec_invalid("spec line " + std::to_string(line_no) + ": bad section");
                section = trim(line.substr(1, line.size() - 2));
                if (section.empty())
                    throw spec_invalid("spec line " + std::to_string(line_no) + ": empty section");
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw spec_invalid("spec line " + std::to_string(line_no) + ": expected key = value");
            std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw spec_invalid("spec line " + std::to_string(line_no) + ": empty key");
            if (!section.empty()) key = section + "." + key;
            if (!spec.values_.emplace(key, value).second)
                throw spec_invalid("spec: duplicate key '" + key + "'");
        }
        return spec;
    }

    static experiment_spec parse_file(const std::string& path) {
        const auto bytes = detail::read_file(path);
        return parse(std::string(bytes.begin(), bytes.end()));
    }

    const std::string& raw_text() const { return raw_text_; }
    std::uint64_t hash() const { return hash_; }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) throw spec_invalid("spec: missing key '" + key + "'");
        return it->second;
    }

    std::string get_string_or(const std::string& key, const std::string& fallback) const {
        const auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key) const { return to_double(key, get_string(key)); }

    double get_double_or(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }

    std::uint64_t get_u64(const std::string& key) const {
        const auto s = get_string(key);
        try {
            std::size_t pos = 0;
            const auto v = std::stoull(s, &pos);
            if (pos != s.size()) throw spec_invalid("");
            return v;
        } catch (...) {
            throw spec_invalid("spec: key '" + key + "' is not an unsigned integer");
        }
    }

    std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const {
        return has(key) ? get_u64(key) : fallback;
    }

    std::vector<double> get_double_list(const std::string& key) const {
        const auto s = get_string(key);
        std::vector<double> out;
        std::string token;
        std::istringstream in(s);
        while (in >> token) {
            if (!token.empty() && token.back() == ',') token.pop_back();
            if (token.empty()) continue;
            out.push_back(to_double(key, token));
        }
        if (out.empty()) throw spec_invalid("spec: key '" + key + "' has no values");
        return out;
    }

    /// Overridable top-level knobs shared by every experiment kind.
    void override_value(const std::string& key, const std::string& value) {
        values_[key] = value;
        // Overrides are part of the effective spec, so the hash must follow.
        std::string canonical = raw_text_;
        canonical += "\n# override " + key + " = " + value + "\n";
        raw_text_ = canonical;
        hash_ = detail::fnv1a_text(raw_text_);
    }

   private:
    static std::string trim(const std::string& s) {
        const auto begin = s.find_first_not_of(" \t\r");
        if (begin == std::string::npos) return "";
        const auto end = s.find_last_not_of(" \t\r");
        return s.substr(begin, end - begin + 1);
    }

    static double to_double(const std::string& key, const std::string& s) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw spec_invalid("");
            return v;
        } catch (...) {
            throw spec_invalid("spec: key '" + key + "' is not a number");
        }
    }

    std::string raw_text_;
    std::uint64_t hash_ = 0;
    std::map<std::string, std::string> values_;
};

inline sim_config sim_config_from(const experiment_spec& spec) {
    sim_config config;
    config.dimension = static_cast<int>(spec.get_u64_or("sim.dimension", 2));
    config.intensity = spec.get_double_or("sim.intensity", 1.0);
    config.radius = spec.get_double("sim.radius");
    config.box_side = spec.get_double("sim.box_side");
    config.master_seed = spec.get_u64_or("seed", 1);
    try {
        config.validate();
    } catch (const error& e) {
        throw spec_invalid(std::string("spec: ") + e.what());
    }
    return config;
}

inline weight_distribution weights_from(const experiment_spec& spec) {
    const auto law = spec.get_string_or("weights.law", "exponential");
    try {
        if (law == "exponential")
            return weight_distribution::exponential(spec.get_double_or("weights.rate", 1.0));
        if (law == "bernoulli01")
            return weight_distribution::bernoulli_zero_one(spec.get_double("weights.p_zero"));
        if (law == "deterministic")
            return weight_distribution::deterministic(spec.get_double("weights.value"));
        if (law == "uniform")
            return weight_distribution::uniform(spec.get_double("weights.low"),
                                                spec.get_double("weights.high"));
    } catch (const spec_invalid&) {
        throw;
    } catch (const error& e) {
        throw spec_invalid(std::string("spec: ") + e.what());
    }
    throw spec_invalid("spec: unknown weight law '" + law + "'");
}

struct run_report {
    std::vector<std::string> output_files;
    double wall_seconds = 0.0;
};

namespace detail {

inline void write_manifest(const std::filesystem::path& dir, const experiment_spec& spec,
                           const run_report& report) {
    std::ofstream out(dir / "manifest.json", std::ios::trunc);
    if (!out) throw resource_error("cannot write manifest");
    char hash_buf[32];
    std::snprintf(hash_buf, sizeof hash_buf, "%016llx",
                  static_cast<unsigned long long>(spec.hash()));
    out << "{\n  \"tool\": \"" << kToolVersion << "\",\n  \"spec_hash\": \"" << hash_buf
        << "\",\n  \"wall_seconds\": " << report.wall_seconds << ",\n  \"outputs\": [";
    for (std::size_t i = 0; i < report.output_files.size(); ++i) {
        if (i > 0) out << ", ";
        out << '"' << report.output_files[i] << '"';
    }
    out << "],\n  \"spec\": [";
    std::istringstream lines(spec.raw_text());
    std::string line;
    bool first = true;
    while (std::getline(lines, line)) {
        std::string escaped;
        for (char c : line) {
            if (c == '"' || c == '\\') escaped += '\\';
            if (static_cast<unsigned char>(c) >= 0x20) escaped += c;
        }
        out << (first ? "" : ", ") << '"' << escaped << '"';
        first = false;
    }
    out << "]\n}\n";
}

}  // namespace detail

/// Executes the experiment named by `kind` in the spec, writing all outputs
/// under out_dir. Outputs are deterministic for a fixed spec; the manifest
/// (which carries the wall time) is the only non-reproducible file.
run_report run_experiment(const experiment_spec& spec, const std::string& out_dir);

}  // namespace shapelab

#include "shapelab/experiment_impl.hpp"
