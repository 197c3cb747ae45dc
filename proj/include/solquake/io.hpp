#pragma once

// File formats and configuration: laminations and boundary maps as JSON
// documents (numbers round-trip bit-exactly through their decimal form),
// norm-bracket records, covers/chains as permutation arrays, leafwise
// families keyed by coset representative words, flat key = value
// experiment configs, and experiment reports.

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "solquake/experiments.hpp"
#include "solquake/solenoid.hpp"

namespace solquake {

using Json = nlohmann::json;

// --- laminations ------------------------------------------------------------

inline Json to_json(const MeasuredLamination& lam) {
    Json atoms = Json::array();
    for (const auto& a : lam.atoms)
        atoms.push_back({{"p_angle", a.geodesic.p.angle},
                         {"q_angle", a.geodesic.q.angle},
                         {"weight", a.weight}});
    return Json{{"atoms", atoms}};
}

inline MeasuredLamination lamination_from_json(const Json& j) {
    MeasuredLamination lam;
    if (!j.contains("atoms") || !j["atoms"].is_array())
        throw ConfigError("lamination document: missing \"atoms\" array");
    for (const auto& a : j["atoms"]) {
        try {
            lam.atoms.push_back({Geodesic(BoundaryPoint(a.at("p_angle").get<double>()),
                                          BoundaryPoint(a.at("q_angle").get<double>())),
                                 a.at("weight").get<double>()});
        } catch (const DegenerateInput& e) {
            throw ConfigError(std::string("lamination document: bad atom: ") + e.what());
        } catch (const Json::exception& e) {
            throw ConfigError(std::string("lamination document: bad record: ") + e.what());
        }
    }
    if (auto v = validate(lam))
        throw ConfigError("lamination document rejected: " + v->describe());
    return lam;
}

// --- boundary maps -----------------------------------------------------------

inline Json to_json(const PiecewiseMobiusCircleMap& h) {
    Json pieces = Json::array();
    for (std::size_t i = 0; i < h.pieces.size(); ++i)
        pieces.push_back({{"breakpoint_angle", h.breakpoints[i]},
                          {"matrix", {h.pieces[i].a, h.pieces[i].b, h.pieces[i].c,
                                      h.pieces[i].d}}});
    return Json{{"pieces", pieces}};
}

inline PiecewiseMobiusCircleMap circle_map_from_json(const Json& j) {
    PiecewiseMobiusCircleMap h;
    if (!j.contains("pieces") || !j["pieces"].is_array())
        throw ConfigError("boundary-map document: missing \"pieces\" array");
    for (const auto& p : j["pieces"]) {
        try {
            const auto& m = p.at("matrix");
            h.breakpoints.push_back(normalize_angle(p.at("breakpoint_angle").get<double>()));
            MobiusMap piece;
            piece.a = m.at(0).get<double>();
            piece.b = m.at(1).get<double>();
            piece.c = m.at(2).get<double>();
            piece.d = m.at(3).get<double>();
            h.pieces.push_back(piece);
        } catch (const Json::exception& e) {
            throw ConfigError(std::string("boundary-map document: bad piece: ") + e.what());
        }
    }
    for (std::size_t i = 1; i < h.breakpoints.size(); ++i)
        if (h.breakpoints[i] <= h.breakpoints[i - 1])
            throw ConfigError("boundary-map document: breakpoints must increase");
    MapValidation v = check_map(h);
    if (!v.ok()) throw ConfigError("boundary-map document: pieces violate continuity/monotonicity");
    return h;
}

// --- norm records ------------------------------------------------------------

inline Json to_json(const HolderNormBracket& b, double nu, int budget, std::uint64_t seed) {
    return Json{{"nu", nu},
                {"lower", b.lower},
                {"upper", b.upper},
                {"budget", budget},
                {"seed", seed}};
}

// --- covers, chains, families --------------------------------------------------

inline Json to_json(const FiniteCover& c) {
    Json sa = Json::array(), sb = Json::array();
    for (int v : c.sigma_a) sa.push_back(v + 1);
    for (int v : c.sigma_b) sb.push_back(v + 1);
    return Json{{"degree", c.degree}, {"sigma_a", sa}, {"sigma_b", sb}};
}

inline FiniteCover cover_from_json(const Json& j) {
    try {
        int degree = j.at("degree").get<int>();
        std::vector<int> sa, sb;
        for (const auto& v : j.at("sigma_a")) sa.push_back(v.get<int>() - 1);
        for (const auto& v : j.at("sigma_b")) sb.push_back(v.get<int>() - 1);
        if (static_cast<int>(sa.size()) != degree || static_cast<int>(sb.size()) != degree)
            throw ConfigError("cover document: permutation size mismatch");
        FiniteCover c(std::move(sa), std::move(sb));
        if (!c.joint_transitive()) throw ConfigError("cover document: action not transitive");
        return c;
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("cover document: ") + e.what());
    }
}

inline Json to_json(const CoreChain& chain) {
    Json levels = Json::array();
    for (const auto& level : chain.covers_new) {
        Json l = Json::array();
        for (const auto& c : level) l.push_back(to_json(c));
        levels.push_back(l);
    }
    return Json{{"depth", chain.depth}, {"levels", levels}};
}

inline Json to_json(const LeafwiseLamination& fam) {
    Json cosets = Json::object();
    for (std::size_t t = 0; t < fam.cosets(); ++t)
        cosets[fam.space->reps[t].str()] = to_json(fam.at(static_cast<int>(t)));
    return Json{{"depth", fam.space->depth}, {"cosets", cosets}};
}

// --- reports -------------------------------------------------------------------

inline Json to_json(const ConvergenceReport& r) {
    Json meta = Json::object();
    for (const auto& [k, v] : r.metadata) meta[k] = v;
    Json asserts = Json::array();
    for (const auto& a : r.assertions)
        asserts.push_back({{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
    return Json{{"experiment", r.experiment},
                {"metadata", meta},
                {"assertions", asserts},
                {"passed", r.passed()}};
}

// --- files -----------------------------------------------------------------------

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << text;
}

inline void write_json_file(const std::string& path, const Json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

// --- experiment configuration ------------------------------------------------------

// Flat key = value text: one pair per line, '#' comments, values typed by
// the consumer. The seed key is mandatory (no runtime entropy).
struct ExperimentConfig {
    std::map<std::string, std::string> values;
    std::string source_path;

    static ExperimentConfig parse(std::istream& in, const std::string& path = "<config>") {
        ExperimentConfig cfg;
        cfg.source_path = path;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto trim = [](std::string s) {
                auto b = s.find_first_not_of(" \t\r");
                auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
            };
            std::string t = trim(line);
            if (t.empty()) continue;
            auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(t.substr(0, eq));
            std::string value = trim(t.substr(eq + 1));
            if (key.empty()) throw ConfigError(path + ": empty key");
            cfg.values[key] = value;
        }
        return cfg;
    }

    static ExperimentConfig load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config: " + path);
        return parse(in, path);
    }

    bool has(const std::string& key) const { return values.count(key) != 0; }

    std::string get_string(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end()) throw ConfigError("config: missing key \"" + key + "\"");
        return it->second;
    }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }

    double get_double(const std::string& key) const {
        return parse_double(get_string(key), key);
    }
    double get_double(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }

    long get_int(const std::string& key) const {
        try {
            std::size_t pos = 0;
            long v = std::stol(get_string(key), &pos);
            if (pos != get_string(key).size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config: key \"" + key + "\" is not an integer");
        }
    }
    long get_int(const std::string& key, long fallback) const {
        return has(key) ? get_int(key) : fallback;
    }

    std::vector<double> get_grid(const std::string& key) const {
        std::vector<double> out;
        for (const auto& part : split(get_string(key), ','))
            out.push_back(parse_double(part, key));
        if (out.empty()) throw ConfigError("config: key \"" + key + "\" is an empty list");
        return out;
    }

    std::vector<std::string> get_list(const std::string& key) const {
        auto out = split(get_string(key), ',');
        if (out.empty()) throw ConfigError("config: key \"" + key + "\" is an empty list");
        return out;
    }

    // Boxes as semicolon-separated corner quadruples "a,b,c,d;a,b,c,d".
    std::vector<GeodesicBox> get_boxes(const std::string& key) const {
        std::vector<GeodesicBox> out;
        for (const auto& spec : split(get_string(key), ';')) {
            auto corners = split(spec, ',');
            if (corners.size() != 4)
                throw ConfigError("config: box spec needs four corner angles");
            out.emplace_back(BoundaryPoint(parse_double(corners[0], key)),
                             BoundaryPoint(parse_double(corners[1], key)),
                             BoundaryPoint(parse_double(corners[2], key)),
                             BoundaryPoint(parse_double(corners[3], key)));
        }
        return out;
    }

    std::uint64_t require_seed() const {
        if (!has("seed")) throw ConfigError("config: seed is required (no runtime entropy)");
        return static_cast<std::uint64_t>(get_int("seed"));
    }

    static std::vector<std::string> split(const std::string& s, char sep) {
        std::vector<std::string> out;
        std::string item;
        std::istringstream in(s);
        while (std::getline(in, item, sep)) {
            auto b = item.find_first_not_of(" \t");
            auto e = item.find_last_not_of(" \t");
            if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
        }
        return out;
    }

private:
    static double parse_double(const std::string& s, const std::string& key) {
        try {
            std::size_t pos = 0;
            double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config: key \"" + key + "\" has a non-numeric entry \"" + s + "\"");
        }
    }
};

} // namespace solquake
