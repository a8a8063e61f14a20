#include "epibsl/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace epibsl {

using nlohmann::json;

namespace {

// Best-effort source line of a dotted field path: each key is searched for in order.
int locate_line(const std::string& text, const std::vector<std::string>& path) {
    std::size_t pos = 0;
    for (const auto& key : path) {
        const auto hit = text.find('"' + key + '"', pos);
        if (hit == std::string::npos) break;
        pos = hit;
    }
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(
                                                                           std::min(pos, text.size())),
                                           '\n'));
}

class Reader {
public:
    Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

    [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
        std::string dotted;
        for (const auto& p : path) dotted += (dotted.empty() ? "" : ".") + p;
        throw ConfigError(source_ + ":" + std::to_string(locate_line(text_, path)) + ": " + dotted +
                          ": " + what);
    }

    void only_keys(const json& obj, const std::vector<std::string>& path,
                   const std::set<std::string>& allowed) const {
        if (!obj.is_object()) fail(path, "expected an object");
        for (const auto& [k, v] : obj.items()) {
            if (!allowed.count(k)) {
                auto p = path;
                p.push_back(k);
                fail(p, "unknown key");
            }
        }
    }

    double number(const json& v, const std::vector<std::string>& path) const {
        if (!v.is_number()) fail(path, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) fail(path, "must be finite");
        return x;
    }

    std::int64_t integer(const json& v, const std::vector<std::string>& path, std::int64_t lo) const {
        if (!v.is_number_integer()) fail(path, "expected an integer");
        const auto x = v.get<std::int64_t>();
        if (x < lo) fail(path, "must be >= " + std::to_string(lo));
        return x;
    }

    std::string string(const json& v, const std::vector<std::string>& path) const {
        if (!v.is_string()) fail(path, "expected a string");
        return v.get<std::string>();
    }

    BetaParam beta(const json& v, const std::vector<std::string>& path) const {
        if (!v.is_array() || v.size() != 2) fail(path, "expected [alpha, beta]");
        const double a = number(v[0], path), b = number(v[1], path);
        if (!(a > 0.0)) fail(path, "alpha must be > 0 (got " + v[0].dump() + ")");
        if (!(b > 0.0)) fail(path, "beta must be > 0 (got " + v[1].dump() + ")");
        return BetaParam{a, b};
    }

    AggregationFunction f(const json& v, std::optional<int> m, const std::vector<std::string>& path) const {
        only_keys(v, path, {"named", "symmetric", "general"});
        if (v.size() != 1) fail(path, "give exactly one of named, symmetric, general");
        std::optional<AggregationFunction> raw;
        if (v.contains("named")) {
            const auto p = sub(path, "named");
            const auto name = string(v["named"], p);
            if (!m) fail(sub(path, "named"), "a named f needs instance.m");
            if (*m < 1 || *m > AggregationFunction::kMaxSymmetricM) fail(sub(path, "named"), "m out of range");
            if (name == "min") raw = AggregationFunction::min(*m);
            else if (name == "max") raw = AggregationFunction::max(*m);
            else if (name == "sum") raw = AggregationFunction::sum(*m);
            else fail(p, "unknown function '" + name + "' (min, max, sum)");
        } else if (v.contains("symmetric")) {
            const auto p = sub(path, "symmetric");
            const json& t = v["symmetric"];
            if (!t.is_array() || t.size() < 2) fail(p, "expected an array of m+1 numbers");
            std::vector<double> table;
            for (const auto& x : t) table.push_back(number(x, p));
            if (m && static_cast<int>(table.size()) != *m + 1) {
                fail(p, "has " + std::to_string(table.size()) + " entries but m = " + std::to_string(*m));
            }
            try {
                raw = AggregationFunction::symmetric(std::move(table));
            } catch (const std::invalid_argument& e) {
                fail(p, e.what());
            }
        } else {
            const auto p = sub(path, "general");
            const json& t = v["general"];
            if (!t.is_object() || t.empty()) fail(p, "expected an object of bitstring keys");
            const int mm = static_cast<int>(t.begin().key().size());
            if (m && mm != *m) fail(p, "keys have length " + std::to_string(mm) + " but m = " + std::to_string(*m));
            if (mm < 1 || mm > AggregationFunction::kMaxGeneralM) fail(p, "m out of range");
            const std::uint32_t n = 1u << mm;
            if (t.size() != n) fail(p, "needs all " + std::to_string(n) + " bitstrings of length " + std::to_string(mm));
            std::vector<double> table(n, 0.0);
            std::vector<bool> seen(n, false);
            for (const auto& [key, val] : t.items()) {
                if (static_cast<int>(key.size()) != mm || key.find_first_not_of("01") != std::string::npos) {
                    fail(sub(p, key), "keys must be bitstrings of length " + std::to_string(mm));
                }
                // Character j is the reward of round j, stored as bit j.
                std::uint32_t bits = 0;
                for (int j = 0; j < mm; ++j) {
                    if (key[static_cast<std::size_t>(j)] == '1') bits |= 1u << j;
                }
                table[bits] = number(val, sub(p, key));
                seen[bits] = true;
            }
            if (std::find(seen.begin(), seen.end(), false) != seen.end()) fail(p, "duplicate bitstrings");
            raw = AggregationFunction::general(mm, std::move(table));
        }
        auto checked = validate_f(*raw);
        if (auto* bad = std::get_if<FViolation>(&checked)) fail(path, bad->message);
        return std::get<AggregationFunction>(std::move(checked));
    }

    static std::vector<std::string> sub(std::vector<std::string> path, const std::string& key) {
        path.push_back(key);
        return path;
    }

private:
    const std::string& text_;
    std::string source_;
};

RunConfig parse_document(const json& doc, const std::string& text, const std::string& source) {
    Reader r(text, source);
    r.only_keys(doc, {}, {"instance", "episodes", "replicates", "master_seed", "sampling_mode", "metrics",
                          "output", "sweep", "posterior", "mu"});
    if (!doc.contains("instance")) r.fail({"instance"}, "missing");
    const json& in = doc["instance"];
    r.only_keys(in, {"instance"}, {"prior1", "prior2", "m", "cost", "f"});
    for (const char* k : {"prior1", "prior2", "cost", "f"}) {
        if (!in.contains(k)) r.fail({"instance", k}, "missing");
    }
    std::optional<int> m;
    if (in.contains("m")) m = static_cast<int>(r.integer(in["m"], {"instance", "m"}, 1));
    const BetaParam p1 = r.beta(in["prior1"], {"instance", "prior1"});
    const BetaParam p2 = r.beta(in["prior2"], {"instance", "prior2"});
    auto f = r.f(in["f"], m, {"instance", "f"});
    const double cost = r.number(in["cost"], {"instance", "cost"});
    if (!(cost > 0.0 && cost <= 1.0)) r.fail({"instance", "cost"}, "must lie in (0, 1]");
    if (!(mean(p1) > mean(p2))) r.fail({"instance", "prior1"}, "arm 1 must have the larger prior mean");

    RunConfig cfg{Instance::make(p1, p2, std::move(f), cost)};
    cfg.source_json = doc.dump();
    if (doc.contains("episodes")) cfg.episodes = r.integer(doc["episodes"], {"episodes"}, 1);
    if (doc.contains("replicates")) cfg.replicates = r.integer(doc["replicates"], {"replicates"}, 1);
    if (doc.contains("master_seed")) {
        const json& s = doc["master_seed"];
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
            r.fail({"master_seed"}, "expected a non-negative integer");
        }
        cfg.master_seed = s.get<std::uint64_t>();
    }
    if (doc.contains("sampling_mode")) {
        const auto s = r.string(doc["sampling_mode"], {"sampling_mode"});
        if (s == "mu_first") cfg.mode = SamplingMode::MuFirst;
        else if (s == "sequential_posterior") cfg.mode = SamplingMode::SequentialPosterior;
        else r.fail({"sampling_mode"}, "expected mu_first or sequential_posterior");
    }
    if (doc.contains("metrics")) {
        const json& mt = doc["metrics"];
        r.only_keys(mt, {"metrics"}, {"fail_c", "fail_N"});
        if (mt.contains("fail_c")) {
            cfg.fail_c = r.number(mt["fail_c"], {"metrics", "fail_c"});
            if (!(cfg.fail_c > 0.0 && cfg.fail_c < 0.5)) r.fail({"metrics", "fail_c"}, "must lie in (0, 1/2)");
        }
        if (mt.contains("fail_N")) {
            const json& n = mt["fail_N"];
            if (n.is_string()) {
                if (n.get<std::string>() != "auto") r.fail({"metrics", "fail_N"}, "expected an integer or \"auto\"");
            } else {
                cfg.fail_n = r.integer(n, {"metrics", "fail_N"}, 0);
            }
        }
    }
    if (!cfg.fail_n) {
        try {
            default_variant(cfg.instance);
        } catch (const std::invalid_argument&) {
            r.fail({"metrics", "fail_N"}, "\"auto\" needs a symmetric f or m = 2; give an integer");
        }
    }
    if (doc.contains("output")) {
        const json& o = doc["output"];
        r.only_keys(o, {"output"}, {"runs", "regret_curve", "sweep", "verify"});
        if (o.contains("runs")) cfg.runs_csv = r.string(o["runs"], {"output", "runs"});
        if (o.contains("regret_curve")) cfg.curve_csv = r.string(o["regret_curve"], {"output", "regret_curve"});
        if (o.contains("sweep")) cfg.sweep_csv = r.string(o["sweep"], {"output", "sweep"});
        if (o.contains("verify")) cfg.verify_csv = r.string(o["verify"], {"output", "verify"});
    }
    if (doc.contains("sweep")) {
        const json& sw = doc["sweep"];
        r.only_keys(sw, {"sweep"}, {"axes", "max_cells"});
        if (sw.contains("max_cells")) cfg.max_cells = r.integer(sw["max_cells"], {"sweep", "max_cells"}, 1);
        if (sw.contains("axes")) {
            const json& ax = sw["axes"];
            if (!ax.is_object()) r.fail({"sweep", "axes"}, "expected an object of arrays");
            for (const auto& [name, vals] : ax.items()) {
                if (!vals.is_array() || vals.empty()) r.fail({"sweep", "axes", name}, "expected a non-empty array");
                SweepAxis a{name, {}};
                for (const auto& v : vals) a.values.push_back(v.dump());
                cfg.axes.push_back(std::move(a));
            }
        }
    }
    if (doc.contains("posterior")) {
        const json& ps = doc["posterior"];
        r.only_keys(ps, {"posterior"}, {"pulls1", "successes1", "pulls2", "successes2"});
        auto get = [&](const char* k) {
            return ps.contains(k) ? r.integer(ps[k], {"posterior", k}, 0) : std::int64_t{0};
        };
        const auto n1 = get("pulls1"), s1 = get("successes1"), n2 = get("pulls2"), s2 = get("successes2");
        if (s1 > n1) r.fail({"posterior", "successes1"}, "exceeds pulls1");
        if (s2 > n2) r.fail({"posterior", "successes2"}, "exceeds pulls2");
        PosteriorState s = cfg.instance.initial_state();
        s.arm1 = BetaParam{p1.alpha + static_cast<double>(s1), p1.beta + static_cast<double>(n1 - s1)};
        s.arm2 = BetaParam{p2.alpha + static_cast<double>(s2), p2.beta + static_cast<double>(n2 - s2)};
        s.pulls1 = n1;
        s.successes1 = s1;
        s.pulls2 = n2;
        s.successes2 = s2;
        cfg.posterior = s;
    }
    if (doc.contains("mu")) {
        const json& mu = doc["mu"];
        if (!mu.is_array() || mu.size() != 2) r.fail({"mu"}, "expected [mu1, mu2]");
        const double a = r.number(mu[0], {"mu"}), b = r.number(mu[1], {"mu"});
        if (!(a >= 0 && a <= 1 && b >= 0 && b <= 1)) r.fail({"mu"}, "means must lie in [0, 1]");
        cfg.mu = MuVec{a, b};
    }
    return cfg;
}

json parse_json(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw ConfigError(source + ":" + std::to_string(line) + ": parse error: " + e.what());
    }
}

}  // namespace

FailureParams RunConfig::failure_params() const { return failure_params(instance); }

FailureParams RunConfig::failure_params(const Instance& inst) const {
    return FailureParams::make(fail_c, fail_n ? *fail_n : n_prior(inst, default_variant(inst)));
}

TheoremVariant default_variant(const Instance& inst) {
    if (inst.f().permutation_invariant()) return TheoremVariant::Symmetric;
    if (inst.m() == 2) return TheoremVariant::GeneralM2;
    throw std::invalid_argument("no pull-bound variant for a non-symmetric f with m != 2");
}

RunConfig parse_config(const std::string& text, const std::string& source) {
    return parse_document(parse_json(text, source), text, source);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ":0: cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

std::vector<SweepCell> expand_sweep(const RunConfig& cfg, const std::string& source) {
    if (cfg.axes.empty()) throw ConfigError(source + ": sweep.axes: missing or empty");
    std::int64_t cells = 1;
    for (const auto& a : cfg.axes) {
        cells *= static_cast<std::int64_t>(a.values.size());
        if (cells > cfg.max_cells) {
            throw ConfigError(source + ": sweep: grid exceeds max_cells = " + std::to_string(cfg.max_cells));
        }
    }
    static const std::set<std::string> instance_keys{"prior1", "prior2", "m", "cost", "f"};
    const json base = json::parse(cfg.source_json);
    std::vector<SweepCell> out;
    std::vector<std::size_t> idx(cfg.axes.size(), 0);
    for (std::int64_t c = 0; c < cells; ++c) {
        json doc = base;
        doc.erase("sweep");
        SweepCell cell{{}, cfg};
        for (std::size_t a = 0; a < cfg.axes.size(); ++a) {
            const auto& axis = cfg.axes[a];
            const std::string& raw = axis.values[idx[a]];
            json value = json::parse(raw);
            if (axis.name == "f" && value.is_string()) value = json{{"named", value}};
            std::string ptr = instance_keys.count(axis.name) ? "/instance/" + axis.name : "/" + axis.name;
            for (auto& ch : ptr) {
                if (ch == '.') ch = '/';
            }
            doc[json::json_pointer(ptr)] = value;
            // A named f follows the m axis; an explicit table fixes m itself.
            if (axis.name == "f" && !value.contains("named")) doc["instance"].erase("m");
            cell.values.push_back(value.is_object() && value.contains("named") ? value["named"].get<std::string>()
                                  : value.is_string() ? value.get<std::string>()
                                                      : raw);
        }
        std::string label;
        for (std::size_t a = 0; a < cfg.axes.size(); ++a) {
            label += (a ? " " : "") + cfg.axes[a].name + "=" + cell.values[a];
        }
        try {
            cell.config = parse_document(doc, doc.dump(2), source + " [cell " + label + "]");
        } catch (const json::exception& e) {
            throw ConfigError(source + ": sweep cell " + label + ": " + e.what());
        }
        out.push_back(std::move(cell));
        for (std::size_t a = cfg.axes.size(); a-- > 0;) {
            if (++idx[a] < cfg.axes[a].values.size()) break;
            idx[a] = 0;
        }
    }
    return out;
}

}  // namespace epibsl
