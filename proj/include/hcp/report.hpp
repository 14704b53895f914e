#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cube.hpp"
#include "error.hpp"
#include "lumped.hpp"
#include "spin.hpp"

namespace hcp {

inline constexpr const char* report_schema_version = "1";
inline constexpr double not_measured = std::numeric_limits<double>::quiet_NaN();

/**
 * \brief One verified statement on one instance.
 *
 * Hard records fail the run when unsatisfied; envelope records (constants left open by the theory) only report.
 */
struct CheckRecord {
    std::string name;
    std::string anchor;    ///< which statement of the theory is being checked
    std::string instance;
    double exact = not_measured;
    double bound = not_measured;
    double lower = not_measured;
    double upper = not_measured;
    double measured = not_measured;  ///< measured constant, when the theory leaves it open
    bool satisfied = true;
    bool hard = true;
    std::string regime = "in";  ///< "in" or "outside the theorem's regime"
    std::string note;
};

namespace detail {

inline nlohmann::json num(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

inline double denum(const nlohmann::json& j) { return j.is_null() ? not_measured : j.get<double>(); }

} // namespace detail

inline nlohmann::json to_json(const CheckRecord& c) {
    return {{"name", c.name},         {"anchor", c.anchor},         {"instance", c.instance},
            {"exact", detail::num(c.exact)}, {"bound", detail::num(c.bound)}, {"lower", detail::num(c.lower)},
            {"upper", detail::num(c.upper)}, {"measured", detail::num(c.measured)},
            {"satisfied", c.satisfied},  {"hard", c.hard},           {"regime", c.regime},
            {"note", c.note}};
}

inline CheckRecord check_from_json(const nlohmann::json& j) {
    CheckRecord c;
    c.name = j.at("name").get<std::string>();
    c.anchor = j.at("anchor").get<std::string>();
    c.instance = j.at("instance").get<std::string>();
    c.exact = detail::denum(j.at("exact"));
    c.bound = detail::denum(j.at("bound"));
    c.lower = detail::denum(j.at("lower"));
    c.upper = detail::denum(j.at("upper"));
    c.measured = detail::denum(j.at("measured"));
    c.satisfied = j.at("satisfied").get<bool>();
    c.hard = j.at("hard").get<bool>();
    c.regime = j.at("regime").get<std::string>();
    c.note = j.at("note").get<std::string>();
    return c;
}

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    std::ostringstream o;
    o << std::hex << std::setw(16) << std::setfill('0') << h;
    return o.str();
}

struct Report {
    std::string experiment;
    nlohmann::json inputs = nlohmann::json::object();
    std::vector<CheckRecord> checks;
    nlohmann::json results = nlohmann::json::object();  ///< free-form computed values
    double wall_seconds = 0;

    void add(CheckRecord c) { checks.push_back(std::move(c)); }
    void add(const std::vector<CheckRecord>& cs) { checks.insert(checks.end(), cs.begin(), cs.end()); }

    std::size_t hard_failures() const {
        std::size_t n = 0;
        for (const auto& c : checks) n += c.hard && !c.satisfied;
        return n;
    }
    std::size_t envelope_misses() const {
        std::size_t n = 0;
        for (const auto& c : checks) n += !c.hard && !c.satisfied;
        return n;
    }
    bool ok() const { return hard_failures() == 0; }

    /// Everything except wall-clock time; the content hash is taken over this.
    nlohmann::json content() const {
        nlohmann::json cs = nlohmann::json::array();
        for (const auto& c : checks) cs.push_back(hcp::to_json(c));
        return {{"schema_version", report_schema_version}, {"experiment", experiment}, {"inputs", inputs},
                {"checks", cs}, {"results", results}};
    }

    std::string content_hash() const { return fnv1a_hex(content().dump()); }

    nlohmann::json to_json() const {
        auto j = content();
        j["content_hash"] = content_hash();
        j["wall_seconds"] = wall_seconds;
        j["summary"] = {{"checks", checks.size()}, {"hard_failures", hard_failures()}, {"envelope_misses", envelope_misses()}};
        return j;
    }

    static Report from_json(const nlohmann::json& j) {
        if (j.at("schema_version").get<std::string>() != report_schema_version) throw invalid_input("unsupported report schema version");
        Report r;
        r.experiment = j.at("experiment").get<std::string>();
        r.inputs = j.at("inputs");
        r.results = j.value("results", nlohmann::json::object());
        for (const auto& c : j.at("checks")) r.checks.push_back(check_from_json(c));
        r.wall_seconds = j.value("wall_seconds", 0.0);
        return r;
    }

    std::string to_csv() const {
        std::ostringstream o;
        o << std::setprecision(17);
        o << "name,anchor,instance,exact,bound,lower,upper,measured,satisfied,hard,regime,note\n";
        auto q = [](const std::string& s) {
            std::string r = "\"";
            for (char ch : s) r += ch == '"' ? std::string("\"\"") : std::string(1, ch);
            return r + "\"";
        };
        auto f = [](double x) {
            if (!std::isfinite(x)) return std::string();
            std::ostringstream s;
            s << std::setprecision(17) << x;
            return s.str();
        };
        for (const auto& c : checks)
            o << q(c.name) << ',' << q(c.anchor) << ',' << q(c.instance) << ',' << f(c.exact) << ',' << f(c.bound) << ','
              << f(c.lower) << ',' << f(c.upper) << ',' << f(c.measured) << ',' << (c.satisfied ? "true" : "false") << ','
              << (c.hard ? "true" : "false") << ',' << q(c.regime) << ',' << q(c.note) << '\n';
        return o.str();
    }
};

// Instance serialization.

/// {"N": n, "classes": [[0-based coordinates], ...]}
inline nlohmann::json partition_to_json(const Partition& p) {
    nlohmann::json cls = nlohmann::json::array();
    for (const auto& c : p.classes()) cls.push_back(c);
    return {{"N", p.N()}, {"classes", cls}};
}

inline Partition partition_from_json(const nlohmann::json& j) {
    std::size_t n = j.at("N").get<std::size_t>();
    auto cls = j.at("classes").get<std::vector<std::vector<std::size_t>>>();
    return Partition(n, std::move(cls));
}

inline nlohmann::json point_to_json(const LumpedPoint& x) { return x.n; }

inline LumpedPoint point_from_json(const nlohmann::json& j) { return LumpedPoint{j.get<std::vector<std::size_t>>()}; }

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_input("cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// A set file holds one configuration per line ('+'/'-' string or 0x hex); '#' starts a comment line.
inline SpinSet read_set_file(const std::string& path, std::size_t n = 0) { return SpinSet::parse_lines(read_text_file(path), n); }

} // namespace hcp
