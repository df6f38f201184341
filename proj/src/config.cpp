#include "speclab/config.hpp"

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

namespace speclab {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos;
        double d = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigInvalid("key '" + key + "': not a number: '" + v + "'");
    }
}

long long to_int(const std::string& key, const std::string& v) {
    try {
        size_t pos;
        long long d = std::stoll(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigInvalid("key '" + key + "': not an integer: '" + v + "'");
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) {
        tok = trim(tok);
        if (!tok.empty())
            out.push_back(tok);
    }
    return out;
}

// section -> key -> value, with every lookup recorded so leftovers can be
// reported as unknown keys
struct Tree {
    std::map<std::string, std::map<std::string, std::string>> kv;
    std::map<std::string, std::map<std::string, bool>> used;

    bool has(const std::string& sec, const std::string& key) {
        auto s = kv.find(sec);
        return s != kv.end() && s->second.count(key);
    }
    std::string get(const std::string& sec, const std::string& key) {
        used[sec][key] = true;
        return kv.at(sec).at(key);
    }
    void num(const std::string& sec, const std::string& key, double& dst) {
        if (has(sec, key))
            dst = to_double(sec + "." + key, get(sec, key));
    }
    void integer(const std::string& sec, const std::string& key, int& dst) {
        if (has(sec, key))
            dst = int(to_int(sec + "." + key, get(sec, key)));
    }
    void check_consumed(const std::vector<std::string>& sections) {
        for (const auto& [sec, keys] : kv) {
            bool known = false;
            for (const auto& s : sections)
                known = known || s == sec;
            if (!known)
                throw ConfigInvalid("unknown config section [" + sec + "]");
            for (const auto& [key, _] : keys)
                if (!used[sec][key])
                    throw ConfigInvalid("unknown key '" + key +
                                        "' in section [" + sec + "]");
        }
    }
};

Tree parse_tree(const std::string& text) {
    Tree t;
    std::string sec;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigInvalid("line " + std::to_string(lineno) +
                                    ": malformed section header");
            sec = trim(line.substr(1, line.size() - 2));
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos || sec.empty())
            throw ConfigInvalid("line " + std::to_string(lineno) +
                                ": expected 'key = value' inside a section");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigInvalid("line " + std::to_string(lineno) +
                                ": empty key");
        if (t.kv[sec].count(key))
            throw ConfigInvalid("duplicate key '" + key + "' in [" + sec +
                                "]");
        t.kv[sec][key] = val;
    }
    return t;
}

std::vector<SymbolFunction::Mode> parse_modes(const std::string& v) {
    std::vector<SymbolFunction::Mode> modes;
    for (const auto& item : split(v, ',')) {
        auto parts = split(item, ':');
        if (parts.size() != 3)
            throw ConfigInvalid("symbol mode '" + item +
                                "' is not m:re:im");
        modes.push_back({int(to_int("symbol.modes", parts[0])),
                         {to_double("symbol.modes", parts[1]),
                          to_double("symbol.modes", parts[2])}});
    }
    if (modes.empty())
        throw ConfigInvalid("symbol.modes is empty");
    return modes;
}

} // namespace

RunConfig RunConfig::from_text(const std::string& text) {
    Tree t = parse_tree(text);
    RunConfig c;

    if (t.has("symbol", "modes"))
        c.trial.symbol_modes = parse_modes(t.get("symbol", "modes"));

    const std::string R = "run";
    t.num(R, "h", c.trial.h);
    t.num(R, "C1", c.trial.C1);
    t.num(R, "C_ball", c.trial.C_ball);
    t.num(R, "eps0_coeff", c.trial.eps0_coeff);
    t.num(R, "delta_fixed", c.trial.delta_fixed);
    t.integer(R, "trials", c.trial.trial_count);
    t.integer(R, "truncation_M", c.trial.truncation_M);
    t.integer(R, "workers", c.trial.workers);
    t.integer(R, "dim_cap", c.trial.dim_cap);
    if (t.has(R, "master_seed")) {
        std::string v = t.get(R, "master_seed");
        try {
            c.trial.master_seed = std::stoull(v);
        } catch (const std::exception&) {
            throw ConfigInvalid("run.master_seed: not a u64: '" + v + "'");
        }
    }
    if (t.has(R, "delta_mode")) {
        std::string v = t.get(R, "delta_mode");
        if (v == "hypothesis")
            c.trial.delta_mode = DeltaMode::hypothesis;
        else if (v == "zero")
            c.trial.delta_mode = DeltaMode::zero;
        else if (v == "fixed")
            c.trial.delta_mode = DeltaMode::fixed;
        else
            throw ConfigInvalid(
                "run.delta_mode must be hypothesis | zero | fixed");
    }
    if (t.has(R, "out_dir"))
        c.out_dir = t.get(R, "out_dir");

    const std::string W = "window";
    t.num(W, "re_lo", c.trial.window.re_lo);
    t.num(W, "re_hi", c.trial.window.re_hi);
    t.num(W, "im_lo", c.trial.window.im_lo);
    t.num(W, "im_hi", c.trial.window.im_hi);
    t.num(W, "margin", c.trial.window.margin);
    t.num(W, "pad_re", c.trial.pad_re);
    t.num(W, "pad_im", c.trial.pad_im);

    const std::string S = "stats";
    t.integer(S, "grid_nx", c.stats.grid_nx);
    t.integer(S, "grid_ny", c.stats.grid_ny);
    t.integer(S, "r_bins", c.stats.r_bins);
    if (t.has(S, "edge_correction")) {
        std::string v = t.get(S, "edge_correction");
        if (v == "erosion")
            c.stats.correction = EdgeCorrection::erosion;
        else if (v == "translation")
            c.stats.correction = EdgeCorrection::translation;
        else
            throw ConfigInvalid(
                "stats.edge_correction must be erosion | translation");
    }

    const std::string T = "theory";
    t.num(T, "w0_im", c.theory.w0_im);
    t.num(T, "r_min", c.theory.r_min);
    t.num(T, "r_max", c.theory.r_max);
    t.integer(T, "points", c.theory.points);

    const std::string G = "gramian";
    t.num(G, "h", c.gramian.h);
    t.num(G, "ratio_lo", c.gramian.ratio_lo);
    t.num(G, "ratio_hi", c.gramian.ratio_hi);
    t.integer(G, "n_ratios", c.gramian.n_ratios);
    t.num(G, "step", c.gramian.step);
    if (t.has(G, "heights")) {
        c.gramian.heights.clear();
        for (const auto& item : split(t.get(G, "heights"), ','))
            c.gramian.heights.push_back(to_double("gramian.heights", item));
        if (c.gramian.heights.empty())
            throw ConfigInvalid("gramian.heights is empty");
    }

    const std::string P = "pseudospectrum";
    t.num(P, "h", c.pseudo.h);
    t.num(P, "re_lo", c.pseudo.re_lo);
    t.num(P, "re_hi", c.pseudo.re_hi);
    t.num(P, "im_lo", c.pseudo.im_lo);
    t.num(P, "im_hi", c.pseudo.im_hi);
    t.integer(P, "nx", c.pseudo.nx);
    t.integer(P, "ny", c.pseudo.ny);

    t.check_consumed({"symbol", "run", "window", "stats", "theory", "gramian",
                      "pseudospectrum"});

    // local sanity that TrialConfig::validate does not cover
    if (c.stats.grid_nx < 1 || c.stats.grid_ny < 1 || c.stats.r_bins < 2)
        throw ConfigInvalid("stats grid/bin counts must be positive");
    if (c.theory.points < 2)
        throw ConfigInvalid("theory.points must be at least 2");
    if (c.gramian.n_ratios < 2 || c.gramian.ratio_lo <= 0 ||
        c.gramian.ratio_hi <= c.gramian.ratio_lo)
        throw ConfigInvalid("gramian ratio grid is malformed");
    if (c.gramian.step <= 0 || c.gramian.h <= 0 || c.gramian.h >= 1)
        throw ConfigInvalid("gramian step/h out of range");
    if (c.pseudo.nx < 2 || c.pseudo.ny < 2 || c.pseudo.h <= 0 ||
        c.pseudo.h >= 1 || c.pseudo.re_hi <= c.pseudo.re_lo ||
        c.pseudo.im_hi <= c.pseudo.im_lo)
        throw ConfigInvalid("pseudospectrum grid is malformed");
    return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigInvalid("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

} // namespace speclab
