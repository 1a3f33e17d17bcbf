#include "treid/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "treid/error.hpp"

namespace treid {

namespace {

using nlohmann::json;

std::string strip(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Drops a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

json parse_value(const std::string& raw, std::size_t lineno);

json parse_array(const std::string& raw, std::size_t lineno) {
    json arr = json::array();
    // Split on commas at bracket depth zero.
    std::size_t depth = 0, start = 1;
    for (std::size_t i = 1; i + 1 <= raw.size(); ++i) {
        const char c = raw[i];
        if (c == '[') ++depth;
        if (c == ']' && depth > 0) --depth;
        if ((c == ',' && depth == 0) || i == raw.size() - 1) {
            const std::string piece = strip(raw.substr(start, i - start));
            if (!piece.empty()) arr.push_back(parse_value(piece, lineno));
            start = i + 1;
        }
    }
    return arr;
}

json parse_value(const std::string& raw, std::size_t lineno) {
    const std::string v = strip(raw);
    if (v.empty()) throw DataError("config line " + std::to_string(lineno) + ": missing value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') {
            throw DataError("config line " + std::to_string(lineno) + ": unterminated string");
        }
        return v.substr(1, v.size() - 2);
    }
    if (v.front() == '[') {
        if (v.back() != ']') {
            throw DataError("config line " + std::to_string(lineno) + ": unterminated array");
        }
        return parse_array(v, lineno);
    }
    if (v == "true") return true;
    if (v == "false") return false;
    // Integer first, then float.
    {
        long long iv = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), iv);
        if (ec == std::errc() && p == v.data() + v.size()) return iv;
    }
    {
        double dv = 0.0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), dv);
        if (ec == std::errc() && p == v.data() + v.size()) return dv;
    }
    throw DataError("config line " + std::to_string(lineno) + ": cannot parse value '" + v + "'");
}

}  // namespace

nlohmann::json parse_toml_subset(const std::string& text) {
    json root = json::object();
    json* section = &root;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = strip(strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') {
                throw DataError("config line " + std::to_string(lineno) + ": bad table header");
            }
            const std::string name = strip(s.substr(1, s.size() - 2));
            if (name.empty()) {
                throw DataError("config line " + std::to_string(lineno) + ": empty table name");
            }
            section = &root[name];
            if (section->is_null()) *section = json::object();
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) {
            throw DataError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = strip(s.substr(0, eq));
        if (key.empty()) {
            throw DataError("config line " + std::to_string(lineno) + ": empty key");
        }
        (*section)[key] = parse_value(s.substr(eq + 1), lineno);
    }
    return root;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    const json exp = j.value("experiment", json::object());
    if (exp.contains("trials")) cfg.trials = exp["trials"].get<std::size_t>();
    if (exp.contains("train_fraction")) cfg.train_fraction = exp["train_fraction"].get<double>();
    if (exp.contains("train_count")) cfg.train_count = exp["train_count"].get<std::size_t>();
    if (exp.contains("seed")) cfg.rng_seed = exp["seed"].get<std::uint64_t>();
    if (exp.contains("ranks")) cfg.ranks = exp["ranks"].get<std::vector<int>>();
    if (exp.contains("gallery_camera"))
        cfg.gallery_camera = exp["gallery_camera"].get<std::string>();
    if (exp.contains("learning")) cfg.learning = exp["learning"].get<bool>();
    if (exp.contains("dims")) {
        const json& dims = exp["dims"];
        if (dims.is_string() && dims.get<std::string>() == "auto") {
            cfg.dims_sweep = {std::nullopt};
        } else if (dims.is_array()) {
            cfg.dims_sweep.clear();
            for (const auto& d : dims) {
                if (!d.is_array() || d.size() != 2) {
                    throw DataError("config: dims entries must be [s, n] pairs or \"auto\"");
                }
                cfg.dims_sweep.push_back(
                    std::make_pair(d[0].get<std::size_t>(), d[1].get<std::size_t>()));
            }
            if (cfg.dims_sweep.empty()) cfg.dims_sweep = {std::nullopt};
        } else {
            throw DataError("config: dims must be \"auto\" or an array of [s, n] pairs");
        }
    }

    const json tx = j.value("txqda", json::object());
    if (tx.contains("lambda") && tx["lambda"].is_number())
        cfg.txqda.lambda = tx["lambda"].get<double>();
    if (tx.contains("max_iters")) cfg.txqda.max_iters = tx["max_iters"].get<std::size_t>();
    if (tx.contains("tol")) cfg.txqda.tol = tx["tol"].get<double>();

    const json fu = j.value("fusion", json::object());
    if (fu.contains("n_parts")) cfg.fusion.n_parts = fu["n_parts"].get<std::size_t>();
    if (fu.contains("normalize")) {
        const std::string mode = fu["normalize"].get<std::string>();
        if (mode == "none")
            cfg.fusion.normalize = Normalize::none;
        else if (mode == "l2" || mode == "l2_per_vector")
            cfg.fusion.normalize = Normalize::l2_per_vector;
        else
            throw DataError("config: normalize must be \"l2\" or \"none\", got \"" + mode + "\"");
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();

    nlohmann::json j;
    if (path.extension() == ".json") {
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("config '" + path.string() + "': " + e.what());
        }
    } else {
        j = parse_toml_subset(text);
    }
    return experiment_config_from_json(j);
}

}  // namespace treid
