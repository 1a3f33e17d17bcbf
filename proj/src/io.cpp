#include "treid/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "treid/error.hpp"

namespace treid {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::uint16_t kTensorVersion = 1;

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xFF));
    out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::vector<unsigned char>& out, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xFF));
}

struct ByteReader {
    const std::vector<unsigned char>& buf;
    std::size_t pos = 0;
    std::string what;

    void need(std::size_t n) {
        if (pos + n > buf.size()) {
            throw DataError(what + ": truncated file");
        }
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(buf[pos] | (buf[pos + 1] << 8));
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[pos + i]) << (8 * i);
        pos += 8;
        return std::bit_cast<double>(bits);
    }
    void magic(const char* m) {
        need(4);
        if (std::memcmp(buf.data() + pos, m, 4) != 0) {
            throw DataError(what + ": bad magic, expected '" + m + "'");
        }
        pos += 4;
    }
};

std::vector<unsigned char> read_all_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    return buf;
}

std::string read_all_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void append_tensor_block(std::vector<unsigned char>& out, const Tensor3& t) {
    out.insert(out.end(), {'T', 'S', 'R', '3'});
    put_u16(out, kTensorVersion);
    put_u32(out, static_cast<std::uint32_t>(t.dim(1)));
    put_u32(out, static_cast<std::uint32_t>(t.dim(2)));
    put_u32(out, static_cast<std::uint32_t>(t.dim(3)));
    for (double v : t.data()) put_f64(out, v);
}

Tensor3 parse_tensor_block(ByteReader& r) {
    r.magic("TSR3");
    const std::uint16_t version = r.u16();
    if (version != kTensorVersion) {
        throw DataError(r.what + ": unsupported tensor version " + std::to_string(version));
    }
    const std::size_t d1 = r.u32();
    const std::size_t d2 = r.u32();
    const std::size_t d3 = r.u32();
    std::vector<double> data(d1 * d2 * d3);
    for (double& v : data) v = r.f64();
    return Tensor3({d1, d2, d3}, std::move(data));
}

Matrix tensor_to_matrix(const Tensor3& t) {
    if (t.dim(3) != 1) throw DataError("matrix block must have mode-3 size 1");
    return Matrix(t.dim(1), t.dim(2), std::vector<double>(t.data().begin(), t.data().end()));
}

Tensor3 matrix_to_tensor(const Matrix& m) {
    return Tensor3({m.rows(), m.cols(), 1},
                   std::vector<double>(m.data().begin(), m.data().end()));
}

double parse_double(std::string_view text, const std::string& context) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc()) throw DataError(context + ": cannot parse number '" +
                                           std::string(text) + "'");
    (void)ptr;
    return v;
}

ordered_json config_to_json(const TxqdaConfig& cfg) {
    ordered_json j;
    if (cfg.target_dims)
        j["target_dims"] = {cfg.target_dims->first, cfg.target_dims->second};
    else
        j["target_dims"] = "auto";
    if (cfg.lambda)
        j["lambda"] = *cfg.lambda;
    else
        j["lambda"] = "auto";
    j["max_iters"] = cfg.max_iters;
    j["tol"] = cfg.tol;
    return j;
}

TxqdaConfig config_from_json(const nlohmann::json& j) {
    TxqdaConfig cfg;
    if (j.contains("target_dims") && j["target_dims"].is_array()) {
        cfg.target_dims = {j["target_dims"][0].get<std::size_t>(),
                           j["target_dims"][1].get<std::size_t>()};
    }
    if (j.contains("lambda") && j["lambda"].is_number()) cfg.lambda = j["lambda"].get<double>();
    if (j.contains("max_iters")) cfg.max_iters = j["max_iters"].get<std::size_t>();
    if (j.contains("tol")) cfg.tol = j["tol"].get<double>();
    return cfg;
}

const char* stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::converged: return "converged";
        case StopReason::no_improvement: return "no_improvement";
        default: return "max_iters";
    }
}

StopReason stop_reason_from(const std::string& s) {
    if (s == "converged") return StopReason::converged;
    if (s == "no_improvement") return StopReason::no_improvement;
    return StopReason::max_iters;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void atomic_write_bytes(const std::filesystem::path& path,
                        const std::vector<unsigned char>& bytes) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    try {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write '" + tmp.string() + "'");
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        if (!out) throw DataError("short write to '" + tmp.string() + "'");
        out.close();
        std::filesystem::rename(tmp, path);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw;
    }
}

void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
    atomic_write_bytes(path, std::vector<unsigned char>(content.begin(), content.end()));
}

void write_tensor(const std::filesystem::path& path, const Tensor3& t) {
    std::vector<unsigned char> out;
    out.reserve(18 + 8 * t.size());
    append_tensor_block(out, t);
    atomic_write_bytes(path, out);
}

Tensor3 read_tensor(const std::filesystem::path& path) {
    const auto buf = read_all_bytes(path);
    ByteReader r{buf, 0, "tensor file '" + path.string() + "'"};
    Tensor3 t = parse_tensor_block(r);
    if (r.pos != buf.size()) {
        throw DataError(r.what + ": trailing bytes after payload");
    }
    return t;
}

void write_features(const std::filesystem::path& path, const FeatureBlock& block) {
    std::string out = "#FEAT v1 d=" + std::to_string(block.dim()) +
                      " m=" + std::to_string(block.samples()) + "\n";
    for (const auto& v : block.vectors) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ',';
            out += format_double(v[i]);
        }
        out += '\n';
    }
    atomic_write_text(path, out);
}

FeatureBlock read_features(const std::filesystem::path& path, std::string source_tag) {
    const std::string text = read_all_text(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw DataError("feature file '" + path.string() + "' is empty");

    std::size_t d = 0, m = 0;
    if (std::sscanf(line.c_str(), "#FEAT v1 d=%zu m=%zu", &d, &m) != 2) {
        throw DataError("feature file '" + path.string() + "': bad header '" + line + "'");
    }
    FeatureBlock block;
    block.source_tag = source_tag.empty() ? path.stem().string() : std::move(source_tag);
    block.vectors.reserve(m);
    for (std::size_t row = 0; row < m; ++row) {
        if (!std::getline(in, line)) {
            throw DataError("feature file '" + path.string() + "': expected " +
                            std::to_string(m) + " rows, found " + std::to_string(row));
        }
        std::vector<double> v;
        v.reserve(d);
        std::size_t start = 0;
        const std::string context = path.string() + " line " + std::to_string(row + 2);
        while (start <= line.size()) {
            std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) comma = line.size();
            v.push_back(parse_double({line.data() + start, comma - start}, context));
            start = comma + 1;
        }
        if (v.size() != d) {
            throw DataError(context + ": expected " + std::to_string(d) + " values, found " +
                            std::to_string(v.size()));
        }
        block.vectors.push_back(std::move(v));
    }
    return block;
}

void write_labels(const std::filesystem::path& path, const SampleLabels& labels) {
    std::string out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out += labels.sample_ids[i] + ',' + labels.person_ids[i] + ',' + labels.camera_ids[i] +
               '\n';
    }
    atomic_write_text(path, out);
}

SampleLabels read_labels(const std::filesystem::path& path) {
    const std::string text = read_all_text(path);
    std::istringstream in(text);
    std::string line;
    SampleLabels labels;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos) {
            throw DataError("label file '" + path.string() + "' line " + std::to_string(lineno) +
                            ": expected <sample_id>,<person_id>,<camera_id>");
        }
        labels.sample_ids.push_back(line.substr(0, c1));
        labels.person_ids.push_back(line.substr(c1 + 1, c2 - c1 - 1));
        labels.camera_ids.push_back(line.substr(c2 + 1));
    }
    if (labels.size() == 0) throw DataError("label file '" + path.string() + "' is empty");
    return labels;
}

void write_model(const std::filesystem::path& path, const TxqdaModel& model) {
    const ProjectionSet& p = model.projections;
    ordered_json header;
    header["format_version"] = 1;
    header["dims"] = {{"input", {p.u1.rows(), p.u2.rows()}},
                      {"reduced", {p.u1.cols(), p.u2.cols()}}};
    header["config"] = config_to_json(model.config);
    header["objective_trace"] = {{"mode1", p.objective1}, {"mode2", p.objective2}};
    header["spectra"] = {{"mode1", p.spectrum1}, {"mode2", p.spectrum2}};
    header["lambda"] = {{"mode1", p.lambda1}, {"mode2", p.lambda2}};
    header["iterations"] = p.iterations;
    header["stop_reason"] = stop_reason_name(p.stop_reason);
    header["warnings"] = p.warnings;

    const std::string json_text = header.dump();
    std::vector<unsigned char> out;
    out.insert(out.end(), {'T', 'X', 'Q', 'M'});
    put_u32(out, static_cast<std::uint32_t>(json_text.size()));
    out.insert(out.end(), json_text.begin(), json_text.end());
    append_tensor_block(out, matrix_to_tensor(p.u1));
    append_tensor_block(out, matrix_to_tensor(p.u2));
    atomic_write_bytes(path, out);
}

TxqdaModel read_model(const std::filesystem::path& path) {
    const auto buf = read_all_bytes(path);
    ByteReader r{buf, 0, "model file '" + path.string() + "'"};
    r.magic("TXQM");
    const std::uint32_t json_len = r.u32();
    r.need(json_len);
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(buf.begin() + static_cast<long>(r.pos),
                                       buf.begin() + static_cast<long>(r.pos + json_len));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(r.what + ": invalid JSON header (" + e.what() + ")");
    }
    r.pos += json_len;

    TxqdaModel model;
    model.config = config_from_json(header.value("config", nlohmann::json::object()));
    ProjectionSet& p = model.projections;
    p.u1 = tensor_to_matrix(parse_tensor_block(r));
    p.u2 = tensor_to_matrix(parse_tensor_block(r));
    if (header.contains("objective_trace")) {
        p.objective1 = header["objective_trace"].value("mode1", std::vector<double>{});
        p.objective2 = header["objective_trace"].value("mode2", std::vector<double>{});
    }
    if (header.contains("spectra")) {
        p.spectrum1 = header["spectra"].value("mode1", std::vector<double>{});
        p.spectrum2 = header["spectra"].value("mode2", std::vector<double>{});
    }
    if (header.contains("lambda")) {
        p.lambda1 = header["lambda"].value("mode1", 0.0);
        p.lambda2 = header["lambda"].value("mode2", 0.0);
    }
    p.iterations = header.value("iterations", std::size_t{0});
    p.stop_reason = stop_reason_from(header.value("stop_reason", std::string("max_iters")));
    p.warnings = header.value("warnings", std::vector<std::string>{});
    return model;
}

void write_ranking_csv(const std::filesystem::path& path, const RankingResult& r,
                       const std::vector<std::string>& probe_sample_ids,
                       const std::vector<std::string>& gallery_sample_ids) {
    if (probe_sample_ids.size() != r.order.size() ||
        gallery_sample_ids.size() != r.gallery_person_ids.size()) {
        throw ArgumentError("sample id arrays do not match the ranking result");
    }
    std::string out = "probe_id,rank,gallery_id,score\n";
    for (std::size_t p = 0; p < r.order.size(); ++p) {
        for (std::size_t rank = 0; rank < r.order[p].size(); ++rank) {
            out += probe_sample_ids[p] + ',' + std::to_string(rank + 1) + ',' +
                   gallery_sample_ids[r.order[p][rank]] + ',' +
                   format_double(r.scores[p][rank]) + '\n';
        }
    }
    atomic_write_text(path, out);
}

void write_cmc_csv(const std::filesystem::path& path, const CmcCurve& c) {
    std::string out = "rank,probability\n";
    for (std::size_t i = 0; i < c.values.size(); ++i) {
        out += std::to_string(i + 1) + ',' + format_double(c.values[i]) + '\n';
    }
    atomic_write_text(path, out);
}

}  // namespace treid
