#include "kleinian/cli.hpp"

#include "kleinian/cat0_boundary.hpp"
#include "kleinian/complexes.hpp"
#include "kleinian/configuration.hpp"
#include "kleinian/errors.hpp"
#include "kleinian/homology.hpp"
#include "kleinian/limit_set.hpp"
#include "kleinian/path_builder.hpp"
#include "kleinian/planarity.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#ifndef KLEINIAN_VERSION
#define KLEINIAN_VERSION "0.0.0"
#endif

namespace kleinian {

const char* tool_version() { return KLEINIAN_VERSION; }

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorCode::IoError, "SHA-256 computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 15]);
    }
    return out;
}

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitViolation = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt(double x, int digits = 6) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

json num_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

int exit_code_for(ErrorCode c) {
    switch (c) {
        case ErrorCode::SeparationViolation:
        case ErrorCode::OrthogonalityViolation:
        case ErrorCode::PerpendicularTooShort:
            return kExitViolation;
        default:
            return kExitInput;
    }
}

// Everything a command records for its manifest.
struct RunContext {
    RunContext(std::ostream& o, std::ostream& e) : out(o), err(e) {}

    std::ostream& out;
    std::ostream& err;
    int threads = 0;
    std::string command;
    json parameters = json::object();
    std::optional<std::uint64_t> seed;
    std::string config_path;
    std::string config_hash;
    std::vector<std::string> outputs;

    void write_file(const std::string& path, const std::string& content) {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
        f << content;
        f.close();
        if (!f) throw Error(ErrorCode::IoError, "cannot write " + path);
        outputs.push_back(path);
    }

    // Human-readable report plus its JSON twin at <path>.json.
    void write_report(const std::string& path, const std::string& text, const json& twin) {
        write_file(path, text);
        write_file(path + ".json", twin.dump(2) + "\n");
    }

    Configuration load_config(const std::string& path, int default_n) {
        if (path.empty()) {
            Configuration c = build_configuration(default_n);
            config_hash = sha256_hex(configuration_to_json(c));
            return c;
        }
        std::string text = read_file(path);
        config_path = path;
        config_hash = sha256_hex(text);
        return configuration_from_json(text);
    }
};

// ------------------------------------------------------------------ config

int cmd_config_new(RunContext& ctx, int n, std::optional<double> ell, const std::string& out_path) {
    ctx.parameters["n"] = n;
    if (ell) ctx.parameters["ell"] = *ell;
    Configuration c = ell ? build_configuration(n, *ell) : build_configuration(n);
    std::string text = configuration_to_json(c);
    ctx.config_hash = sha256_hex(text);
    if (out_path.empty()) {
        ctx.out << text;
    } else {
        ctx.write_file(out_path, text);
        ctx.out << "wrote configuration n=" << c.n() << " ell=" << fmt(c.ell(), 17) << " to " << out_path << "\n";
    }
    return kExitOk;
}

int cmd_config_validate(RunContext& ctx, const std::string& path, int depth) {
    ctx.parameters["depth"] = depth;
    Configuration c = ctx.load_config(path, 2);
    ValidationReport rep;
    std::optional<std::string> failure;
    try {
        rep = validate_configuration(c, depth, ctx.threads);
    } catch (const ValidationError& e) {
        rep = e.report();
        failure = e.what();
    }
    auto& o = ctx.out;
    o << "configuration: " << path << " (n=" << c.n() << ", ell=" << fmt(c.ell(), 10) << ")\n";
    o << "depth: " << rep.depth << "\n";
    o << "words checked: " << rep.words_checked << "\n";
    o << "axis/word pairs checked: " << rep.pairs_checked << "\n";
    o << "min separation: " << fmt(rep.min_separation, 10);
    if (!rep.min_word.empty()) o << " (word " << rep.min_word << ", axis " << rep.min_axis << ")";
    o << "\nrequired (3L): " << fmt(3.0 * constant_L(), 10) << "\n";
    o << "orthogonality residual: " << fmt(rep.orthogonality_residual, 3) << "\n";
    o << "intersection residual: " << fmt(rep.intersection_residual, 3) << "\n";
    if (failure) {
        o << "verdict: FAIL " << *failure << "\n";
        return kExitViolation;
    }
    o << "verdict: PASS\n";
    return kExitOk;
}

// ------------------------------------------------------------------ certify

struct CertifyRow {
    std::string word;
    std::optional<PipelineResult> result;
    std::string error;
    bool passed = false;
};

std::string describe(const PipelineResult& r, int periods) {
    const auto& q = r.certificate;
    std::ostringstream o;
    o << "word: " << format_word(r.word) << "\n";
    o << "itinerary: " << format_itinerary(r.itinerary) << "\n";
    o << "periods: " << periods << "\n";
    o << "segments: raw " << r.raw.segments.size() << ", replaced " << r.replaced.segments.size() << ", final "
      << r.final_path.segments.size() << " (" << r.long_segments << " long, " << r.short_segments << " short)\n";
    o << "A: " << fmt(q.A, 10) << "\nB: " << fmt(q.B, 10) << "\nL: " << fmt(q.L, 10) << "\n";
    o << "total length: " << fmt(q.total_length, 10) << "\n";
    o << "endpoint distance: " << fmt(q.endpoints_distance, 10) << "\n";
    o << "worst margin: " << fmt(q.worst_margin, 10) << "\n";
    o << "worst pair: s_a=" << fmt(q.worst_s_a, 10) << " s_b=" << fmt(q.worst_s_b, 10) << "\n";
    o << "upper slack: " << fmt(q.worst_upper_slack, 10) << "\n";
    o << "samples: " << q.samples << "\nseed: " << q.seed << "\n";
    o << "min bisector separation: " << fmt(r.min_bisector, 10) << "\n";
    o << "min Case 2 perpendicular: " << fmt(r.min_perpendicular, 10) << "\n";
    o << "worst junction angle error: " << fmt(r.worst_angle_error, 3) << "\n";
    o << "max short segment: " << fmt(r.max_short_length, 6) << "\n";
    o << "endpoints preserved: " << (r.endpoints_preserved ? "yes" : "no") << "\n";
    o << "verdict: " << (q.passes() ? "PASS" : "FAIL") << "\n";
    return o.str();
}

json row_json(const CertifyRow& row, int periods) {
    json j;
    j["word"] = row.word;
    j["passed"] = row.passed;
    if (!row.result) {
        j["error"] = row.error;
        return j;
    }
    const PipelineResult& r = *row.result;
    const auto& q = r.certificate;
    j["itinerary"] = format_itinerary(r.itinerary);
    j["periods"] = periods;
    j["A"] = q.A;
    j["B"] = q.B;
    j["L"] = q.L;
    j["worst_margin"] = q.worst_margin;
    j["worst_pair"] = {{"s_a", q.worst_s_a}, {"s_b", q.worst_s_b}};
    j["worst_upper_slack"] = q.worst_upper_slack;
    j["samples"] = q.samples;
    j["seed"] = q.seed;
    j["total_length"] = q.total_length;
    j["endpoints_distance"] = q.endpoints_distance;
    j["segments"] = {{"raw", r.raw.segments.size()},
                     {"replaced", r.replaced.segments.size()},
                     {"final", r.final_path.segments.size()},
                     {"long", r.long_segments},
                     {"short", r.short_segments}};
    j["min_bisector"] = num_or_null(r.min_bisector);
    j["min_perpendicular"] = num_or_null(r.min_perpendicular);
    j["worst_angle_error"] = r.worst_angle_error;
    j["max_short_length"] = r.max_short_length;
    j["endpoints_preserved"] = r.endpoints_preserved;
    return j;
}

std::vector<Word> read_word_batch(const std::string& path) {
    std::istringstream in(read_file(path));
    std::vector<Word> words;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            words.push_back(parse_word(line));
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (words.empty()) throw Error(ErrorCode::ParseError, path + ": no words");
    return words;
}

struct CertifyArgs {
    std::string config;
    std::string word;
    std::string batch;
    int random = 0;
    int max_syllables = 8;
    int periods = 3;
    int samples = 200;
    std::uint64_t seed = 1;
    std::string report;
};

int cmd_certify(RunContext& ctx, const CertifyArgs& a) {
    const int modes = !a.word.empty() + !a.batch.empty() + (a.random > 0);
    if (modes != 1) throw Error(ErrorCode::InvalidParameters, "give exactly one of --word, --batch, --random");
    ctx.seed = a.seed;
    ctx.parameters = {{"periods", a.periods}, {"samples", a.samples}, {"seed", a.seed}};
    Configuration c = ctx.load_config(a.config, 2);

    std::vector<Word> words;
    if (!a.word.empty()) {
        words.push_back(parse_word(a.word));
        ctx.parameters["word"] = a.word;
    } else if (!a.batch.empty()) {
        words = read_word_batch(a.batch);
        ctx.parameters["batch"] = a.batch;
    } else {
        words = random_loop_words(c.n(), a.random, a.max_syllables, a.seed);
        ctx.parameters["random"] = a.random;
        ctx.parameters["max_syllables"] = a.max_syllables;
    }
    for (const Word& w : words) validate_word(w, c.n());

    std::vector<CertifyRow> rows;
    for (size_t i = 0; i < words.size(); ++i) {
        CertifyRow row;
        row.word = format_word(words[i]);
        try {
            row.result = run_pipeline(c, words[i], a.periods, a.samples, a.seed + i, ctx.threads);
            row.passed = row.result->certificate.passes();
        } catch (const Error& e) {
            if (exit_code_for(e.code()) != kExitViolation) throw;
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    const bool all_pass = std::all_of(rows.begin(), rows.end(), [](const CertifyRow& r) { return r.passed; });

    std::ostringstream text;
    json twin;
    twin["A"] = constant_A();
    twin["B"] = constant_B();
    twin["L"] = constant_L();
    twin["samples"] = a.samples;
    twin["seed"] = a.seed;
    twin["periods"] = a.periods;
    twin["words"] = json::array();
    for (const auto& row : rows) twin["words"].push_back(row_json(row, a.periods));
    twin["all_passed"] = all_pass;

    if (rows.size() == 1 && !a.word.empty()) {
        if (rows[0].result)
            text << describe(*rows[0].result, a.periods);
        else
            text << "word: " << rows[0].word << "\nverdict: FAIL " << rows[0].error << "\n";
    } else {
        double worst = std::numeric_limits<double>::infinity();
        double bis = worst, perp = worst, ang = 0;
        bool endpoints = true;
        int passed = 0;
        char line[256];
        std::snprintf(line, sizeof line, "%4s %-5s %12s %10s %10s %10s %5s  %s\n", "#", "pass", "margin",
                      "bisector", "perp", "angle_err", "segs", "word");
        text << line;
        for (size_t i = 0; i < rows.size(); ++i) {
            const auto& row = rows[i];
            passed += row.passed;
            if (!row.result) {
                text << std::string(4 - std::min<size_t>(4, std::to_string(i).size()), ' ') << i
                     << " FAIL  " << row.error << "  " << row.word << "\n";
                continue;
            }
            const auto& r = *row.result;
            worst = std::min(worst, r.certificate.worst_margin);
            bis = std::min(bis, r.min_bisector);
            perp = std::min(perp, r.min_perpendicular);
            ang = std::max(ang, r.worst_angle_error);
            endpoints = endpoints && r.endpoints_preserved;
            std::snprintf(line, sizeof line, "%4zu %-5s %12s %10s %10s %10s %5zu  ", i, row.passed ? "yes" : "NO",
                          fmt(r.certificate.worst_margin, 8).c_str(), fmt(r.min_bisector, 6).c_str(),
                          fmt(r.min_perpendicular, 6).c_str(), fmt(r.worst_angle_error, 2).c_str(),
                          r.final_path.segments.size());
            text << line << row.word << "\n";
        }
        text << "words: " << rows.size() << "\npassed: " << passed << "\n";
        text << "A: " << fmt(constant_A(), 10) << "\nB: " << fmt(constant_B(), 10) << "\n";
        text << "worst margin: " << fmt(worst, 10) << "\n";
        text << "min bisector separation: " << fmt(bis, 10) << "\n";
        text << "min Case 2 perpendicular: " << fmt(perp, 10) << "\n";
        text << "worst junction angle error: " << fmt(ang, 3) << "\n";
        text << "endpoints preserved: " << (endpoints ? "yes" : "no") << "\n";
        text << "samples: " << a.samples << "\nseed: " << a.seed << "\n";
        text << "verdict: " << (all_pass ? "PASS" : "FAIL") << "\n";
        twin["worst_margin"] = num_or_null(worst);
        twin["min_bisector"] = num_or_null(bis);
        twin["min_perpendicular"] = num_or_null(perp);
        twin["worst_angle_error"] = ang;
    }
    ctx.out << text.str();
    if (!a.report.empty()) ctx.write_report(a.report, text.str(), twin);
    return all_pass ? kExitOk : kExitViolation;
}

// ------------------------------------------------------------------ limitset

struct LimitsetArgs {
    std::string config;
    int depth = 2;
    int per_sphere = 8;
    std::string format = "csv";
    bool stereographic = false;
    std::string pole = "1,2,3,4";
    int e_points = 0;
    int e_horizon = 6;
    std::uint64_t seed = 0;
    std::string out;
};

std::array<double, 4> parse_pole(const std::string& text) {
    std::array<double, 4> p{};
    std::istringstream in(text);
    std::string tok;
    size_t k = 0;
    while (std::getline(in, tok, ',')) {
        if (k >= 4) throw Error(ErrorCode::ParseError, "--pole needs 4 comma-separated numbers");
        try {
            size_t used = 0;
            p[k] = std::stod(tok, &used);
            if (tok.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, "--pole: bad number '" + tok + "'");
        }
        ++k;
    }
    if (k != 4) throw Error(ErrorCode::ParseError, "--pole needs 4 comma-separated numbers");
    double norm = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3]);
    if (!(norm > 0) || !std::isfinite(norm)) throw Error(ErrorCode::InvalidParameters, "--pole must be nonzero");
    for (double& x : p) x /= norm;
    return p;
}

int cmd_limitset(RunContext& ctx, const LimitsetArgs& a) {
    ctx.seed = a.seed;
    ctx.parameters = {{"depth", a.depth},         {"per_sphere", a.per_sphere}, {"format", a.format},
                      {"stereographic", a.stereographic}, {"e_points", a.e_points},     {"e_horizon", a.e_horizon},
                      {"seed", a.seed}};
    Configuration c = ctx.load_config(a.config, 2);
    if (a.format == "csv" && a.stereographic)
        throw Error(ErrorCode::InvalidParameters, "--stereographic is only available with --format ply");
    std::array<double, 4> pole{1, 0, 0, 0};
    if (a.format == "ply") {
        if (c.n() != 2)
            throw Error(ErrorCode::WrongDimension, "ply export needs n = 2 (points on S^3), got n = " +
                                                       std::to_string(c.n()));
        pole = parse_pole(a.pole);
        ctx.parameters["pole"] = a.pole;
    }
    if (a.per_sphere < 1) throw Error(ErrorCode::InvalidParameters, "--per-sphere must be >= 1");

    OrbitOptions opt;
    opt.e_points = a.e_points;
    opt.e_horizon = a.e_horizon;
    opt.seed = a.seed;
    opt.threads = ctx.threads;
    LimitSetSample s = orbit_sample(c, a.depth, a.per_sphere, opt);

    std::ostringstream data;
    if (a.format == "ply")
        write_ply(data, s, pole);
    else
        write_csv(data, s);
    ctx.write_file(a.out, data.str());

    long e_count = std::count_if(s.points.begin(), s.points.end(),
                                 [](const LimitPoint& p) { return p.component == Component::E; });
    ctx.out << "points: " << s.points.size() << " (" << s.points.size() - e_count << " S, " << e_count << " E)\n";
    ctx.out << "words: " << count_words(c.n(), a.depth) << "\n";
    ctx.out << "distinct at 1e-7: " << dedup(s).points.size() << "\n";
    ctx.out << "wrote " << a.format << " to " << a.out << "\n";
    return kExitOk;
}

// ------------------------------------------------------------------ complex

std::string betti_line(const HomologyResult& h) {
    std::ostringstream o;
    o << "reduced betti: (";
    for (size_t i = 0; i < h.betti.size(); ++i) o << (i ? ", " : "") << h.betti[i];
    o << ")\n";
    bool torsion = false;
    for (size_t i = 0; i < h.torsion.size(); ++i)
        if (!h.torsion[i].empty()) {
            torsion = true;
            o << "torsion in degree " << i << ":";
            for (auto t : h.torsion[i]) o << " Z/" << t;
            o << "\n";
        }
    if (!torsion) o << "torsion: none\n";
    return o.str();
}

int cmd_join_k3(RunContext& ctx, int n, bool homology, const std::string& out_path) {
    ctx.parameters = {{"n", n}, {"homology", homology}};
    if (n < 1) throw Error(ErrorCode::InvalidParameters, "--n must be >= 1");
    SimplicialComplex k = join_power_k3(n);
    ctx.out << "join of " << n << " copies of K3: " << k.vertices().size() << " vertices, " << k.facets().size()
            << " facets, dimension " << k.dim() << "\n";
    if (homology) ctx.out << betti_line(homology_ranks(k));
    if (!out_path.empty()) {
        std::ostringstream f;
        write_facets(f, k);
        ctx.write_file(out_path, f.str());
        ctx.out << "wrote facets to " << out_path << "\n";
    }
    return kExitOk;
}

int cmd_homology(RunContext& ctx, const std::string& path) {
    ctx.parameters = {{"facets", path}};
    std::istringstream in(read_file(path));
    SimplicialComplex k = read_facets(in);
    ctx.out << "complex: " << k.vertices().size() << " vertices, " << k.facets().size() << " facets, dimension "
            << k.dim() << "\n";
    ctx.out << betti_line(homology_ranks(k));
    return kExitOk;
}

std::string planarity_text(const Graph& g, const PlanarityResult& r) {
    std::ostringstream o;
    o << "V=" << g.vertex_count() << " E=" << g.edge_count() << " " << (r.planar ? "planar" : "nonplanar") << "\n";
    if (r.witness) {
        std::string why;
        const bool ok = verify_witness(g, *r.witness, &why);
        o << format_witness(g, *r.witness);
        o << "witness verified: " << (ok ? "yes" : "no (" + why + ")") << "\n";
    }
    return o.str();
}

int cmd_planarity(RunContext& ctx, const std::string& path) {
    ctx.parameters = {{"graph", path}};
    std::istringstream in(read_file(path));
    Graph g = read_edge_list(in);
    ctx.out << planarity_text(g, is_planar(g));
    return kExitOk;
}

int cmd_incidence(RunContext& ctx, const std::string& config, const std::string& out_path) {
    Configuration c = ctx.load_config(config, 2);
    if (c.n() == 2) {
        CircleIncidence ci = circle_incidence(c);
        ctx.out << "circle incidence graph: " << planarity_text(ci.graph, is_planar(ci.graph));
        if (!out_path.empty()) {
            std::ostringstream f;
            write_edge_list(f, ci.graph);
            ctx.write_file(out_path, f.str());
            ctx.out << "wrote edge list to " << out_path << "\n";
        }
    }
    SimplicialComplex k = incidence_complex(c);
    ctx.out << "incidence complex: " << k.vertices().size() << " vertices, " << k.facets().size() << " facets\n";
    auto w = contains_join_power(k, c.n(), ctx.threads);
    if (!w) {
        ctx.out << "join witness: none\n";
        return kExitViolation;
    }
    ctx.out << "join witness:";
    for (const auto& t : w->triples)
        ctx.out << " {" << k.vertices()[static_cast<size_t>(t[0])] << "," << k.vertices()[static_cast<size_t>(t[1])]
                << "," << k.vertices()[static_cast<size_t>(t[2])] << "}";
    ctx.out << "\njoin witness verified: " << (verify_join_witness(k, *w) ? "yes" : "no") << "\n";
    return kExitOk;
}

// ------------------------------------------------------------------ boundary

struct BoundaryArgs {
    std::string config;
    std::string rays;
    int random = 0;
    std::uint64_t seed = 1;
    int horizon = 10;
    double tol = 1e-6;
    int gap_from = 6;
    int gap_to = -1;
    std::string report;
};

int cmd_boundary(RunContext& ctx, const BoundaryArgs& a) {
    if (a.rays.empty() == (a.random <= 0)) throw Error(ErrorCode::InvalidParameters, "give exactly one of --rays, --random");
    ctx.parameters = {{"horizon", a.horizon}, {"tol", a.tol}, {"gap_from", a.gap_from}, {"gap_to", a.gap_to}};
    std::vector<ProductRay> rays;
    if (!a.rays.empty()) {
        std::istringstream in(read_file(a.rays));
        rays = read_rays(in);
        ctx.parameters["rays"] = a.rays;
    }
    int n = rays.empty() ? 2 : rays.front().n();
    Configuration c = ctx.load_config(a.config, n);
    if (a.random > 0) {
        ctx.seed = a.seed;
        ctx.parameters["random"] = a.random;
        ctx.parameters["seed"] = a.seed;
        rays = random_rays(c.n(), a.random, a.seed);
    }
    for (size_t i = 0; i < rays.size(); ++i)
        if (rays[i].n() != c.n())
            throw Error(ErrorCode::InvalidParameters, "ray " + std::to_string(i) + " has " +
                                                          std::to_string(rays[i].n()) + " factors, configuration has " +
                                                          std::to_string(c.n()));
    InjectivityReport r = injectivity_test(rays, c, a.horizon, a.tol, a.gap_from, a.gap_to, ctx.threads);

    std::ostringstream o;
    o << "rays: " << rays.size() << "\nhorizon: " << r.horizon << "\ntolerance: " << fmt(r.tol) << "\n";
    o << "pairs: " << r.pairs << "\n";
    o << "min separation: " << format_real(r.min_separation, 6);
    if (r.min_i >= 0) o << " (rays " << r.min_i << ", " << r.min_j << ")";
    o << "\npairs below tolerance: " << r.below_tol << "\n";
    o << "all images distinct: " << (r.distinct ? "yes" : "no") << "\n";
    o << "gap horizons: " << r.gap_from << ".." << r.gap_to << "\n";
    o << "gaps decreasing (h -> h+2): " << (r.gaps_decreasing ? "yes" : "no") << "\n";
    o << "consecutive gap non-decreases: " << r.consecutive_violations << "\n";
    o << "verdict: " << (r.passed ? "PASS" : "FAIL") << "\n";
    ctx.out << o.str();

    if (!a.report.empty()) {
        std::ostringstream full;
        full << o.str();
        json twin;
        twin["rays"] = json::array();
        for (size_t i = 0; i < rays.size(); ++i) {
            full << "ray " << i << ": " << format_ray(rays[i]) << "\n  gaps:";
            json gaps = json::array();
            for (const Real& g : r.gaps[i]) {
                full << " " << format_real(g, 4);
                gaps.push_back(format_real(g, 17));
            }
            full << "\n";
            twin["rays"].push_back({{"ray", format_ray(rays[i])}, {"gaps", gaps}});
        }
        twin["horizon"] = r.horizon;
        twin["tol"] = r.tol;
        twin["pairs"] = r.pairs;
        twin["min_separation"] = format_real(r.min_separation, 17);
        twin["min_pair"] = {r.min_i, r.min_j};
        twin["below_tol"] = r.below_tol;
        twin["distinct"] = r.distinct;
        twin["gap_from"] = r.gap_from;
        twin["gap_to"] = r.gap_to;
        twin["gaps_decreasing"] = r.gaps_decreasing;
        twin["consecutive_violations"] = r.consecutive_violations;
        twin["passed"] = r.passed;
        ctx.write_report(a.report, full.str(), twin);
    }
    return r.passed ? kExitOk : kExitViolation;
}

// ------------------------------------------------------------------ manifest

std::vector<std::string> recorded_args(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    for (size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--manifest") {
            ++i;
            continue;
        }
        if (args[i].rfind("--manifest=", 0) == 0 || args[i] == "--no-manifest") continue;
        out.push_back(args[i]);
    }
    return out;
}

std::string manifest_location(const RunContext& ctx, const std::string& requested) {
    if (!requested.empty()) return requested;
    if (!ctx.outputs.empty()) return ctx.outputs.front() + ".manifest.json";
    std::string name = ctx.command;
    std::replace(name.begin(), name.end(), ' ', '-');
    return "klein-" + name + ".manifest.json";
}

json build_manifest(const RunContext& ctx, const std::vector<std::string>& args, const std::string& stdout_text,
                    int code) {
    json m;
    m["format"] = "kleinian-run-manifest";
    m["version"] = 1;
    m["tool_version"] = tool_version();
    m["command"] = ctx.command;
    m["argv"] = recorded_args(args);
    m["working_directory"] = fs::current_path().string();
    m["parameters"] = ctx.parameters;
    m["seed"] = ctx.seed ? json(*ctx.seed) : json(nullptr);
    m["configuration"] = {{"path", ctx.config_path.empty() ? json(nullptr) : json(ctx.config_path)},
                          {"sha256", ctx.config_hash.empty() ? json(nullptr) : json(ctx.config_hash)}};
    m["outputs"] = json::array();
    for (const auto& p : ctx.outputs) m["outputs"].push_back({{"path", p}, {"sha256", file_sha256(p)}});
    m["stdout_sha256"] = sha256_hex(stdout_text);
    m["exit_code"] = code;
    return m;
}

int run_commands(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cmd_replay(const std::string& path, std::ostream& out, std::ostream& err) {
    json m;
    try {
        m = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    if (m.value("format", "") != "kleinian-run-manifest")
        throw Error(ErrorCode::ParseError, path + ": not a run manifest");
    std::vector<std::string> args = m.at("argv").get<std::vector<std::string>>();
    if (!args.empty() && args.front() == "replay") throw Error(ErrorCode::InvalidParameters, "cannot replay a replay");

    const fs::path here = fs::current_path();
    const std::string wd = m.value("working_directory", "");
    if (!wd.empty() && fs::is_directory(wd)) fs::current_path(wd);
    struct Restore {
        fs::path p;
        ~Restore() {
            std::error_code ec;
            fs::current_path(p, ec);
        }
    } restore{here};

    const json& cfg = m.at("configuration");
    if (cfg.at("path").is_string()) {
        const std::string cpath = cfg.at("path").get<std::string>();
        if (file_sha256(cpath) != cfg.at("sha256").get<std::string>())
            throw Error(ErrorCode::Precondition, "configuration " + cpath + " changed since the recorded run");
    }

    args.push_back("--no-manifest");
    std::ostringstream captured;
    const int code = run_commands(args, captured, err);

    std::vector<std::string> mismatches;
    if (code != m.at("exit_code").get<int>())
        mismatches.push_back("exit code " + std::to_string(code) + " != " + std::to_string(m.at("exit_code").get<int>()));
    if (sha256_hex(captured.str()) != m.at("stdout_sha256").get<std::string>()) mismatches.push_back("stdout differs");
    size_t n_out = 0;
    for (const auto& o : m.at("outputs")) {
        ++n_out;
        const std::string p = o.at("path").get<std::string>();
        std::string h;
        try {
            h = file_sha256(p);
        } catch (const Error&) {
            mismatches.push_back(p + " missing");
            continue;
        }
        if (h != o.at("sha256").get<std::string>()) mismatches.push_back(p + " differs");
    }
    if (mismatches.empty()) {
        out << "replay " << path << ": identical (exit code, stdout, " << n_out << " output file"
            << (n_out == 1 ? "" : "s") << ")\n";
        return kExitOk;
    }
    out << "replay " << path << ": MISMATCH\n";
    for (const auto& s : mismatches) out << "  " << s << "\n";
    return kExitViolation;
}

// ------------------------------------------------------------------ dispatch

int run_commands(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Kleinian group toolkit: configurations, quasi-geodesic certificates, limit sets, complexes"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tool_version()));

    int threads = 0;
    std::string manifest_path;
    bool no_manifest = false;
    app.add_option("--threads", threads, "Worker threads (default: KLEINIAN_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--manifest", manifest_path, "Where to write the run manifest");
    app.add_flag("--no-manifest", no_manifest)->group("");

    // config
    auto* config = app.add_subcommand("config", "Create or validate a configuration file");
    config->require_subcommand(1);
    auto* cfg_new = config->add_subcommand("new", "Build a configuration");
    int new_n = 2;
    std::optional<double> new_ell;
    std::string new_out;
    cfg_new->add_option("--n", new_n, "Number of factors")->required();
    cfg_new->add_option("--ell", new_ell, "Translation length of the a generators (default 6L)");
    cfg_new->add_option("--out", new_out, "Output file (default: standard output)");
    auto* cfg_val = config->add_subcommand("validate", "Check the separation and orthogonality invariants");
    std::string val_path;
    int val_depth = 3;
    cfg_val->add_option("file", val_path, "Configuration file")->required();
    cfg_val->add_option("--depth", val_depth, "Word length to check")->check(CLI::PositiveNumber);

    // certify
    CertifyArgs ca;
    auto* certify = app.add_subcommand("certify", "Run the quasi-geodesic pipeline on loop words");
    certify->add_option("--config", ca.config, "Configuration file (default: built-in n = 2)");
    certify->add_option("--word", ca.word, "Word literal, e.g. \"a1+ b2+ a1- b2-\"");
    certify->add_option("--batch", ca.batch, "File with one word per line");
    certify->add_option("--random", ca.random, "Number of seeded random loop words");
    certify->add_option("--max-syllables", ca.max_syllables, "Syllable bound for --random")
        ->check(CLI::PositiveNumber);
    certify->add_option("--periods", ca.periods, "Periods of the loop to concatenate")->check(CLI::PositiveNumber);
    certify->add_option("--samples", ca.samples, "Random point pairs per path")->check(CLI::PositiveNumber);
    certify->add_option("--seed", ca.seed, "Seed");
    certify->add_option("--report", ca.report, "Report file (a JSON twin goes to <report>.json)");

    // limitset
    LimitsetArgs la;
    auto* limitset = app.add_subcommand("limitset", "Sample the limit set and export a point cloud");
    limitset->add_option("--config", la.config, "Configuration file (default: built-in n = 2)");
    limitset->add_option("--depth", la.depth, "Orbit word length")->check(CLI::NonNegativeNumber);
    limitset->add_option("--per-sphere", la.per_sphere, "Points per boundary sphere");
    limitset->add_option("--format", la.format, "csv or ply")->check(CLI::IsMember({"csv", "ply"}));
    limitset->add_flag("--stereographic", la.stereographic, "Project S^3 to R^3 (ply, n = 2)");
    limitset->add_option("--pole", la.pole, "Projection pole x0,x1,x2,x3 (normalized; default 1,2,3,4 avoids the axis endpoints)");
    limitset->add_option("--e-points", la.e_points, "Number of E-component points")->check(CLI::NonNegativeNumber);
    limitset->add_option("--e-horizon", la.e_horizon, "Syllables per E point")->check(CLI::PositiveNumber);
    limitset->add_option("--seed", la.seed, "Seed");
    limitset->add_option("--out", la.out, "Output file")->required();

    // complex
    auto* complex = app.add_subcommand("complex", "Join complexes, homology, planarity, incidence");
    complex->require_subcommand(1);
    auto* join_k3 = complex->add_subcommand("join-k3", "n-fold join of the 3-point set");
    int join_n = 2;
    std::string join_action, join_out;
    join_k3->add_option("--n", join_n, "Number of factors")->required();
    join_k3->add_option("action", join_action, "homology")->check(CLI::IsMember({"homology"}));
    join_k3->add_option("--out", join_out, "Facet file to write");
    auto* homology = complex->add_subcommand("homology", "Reduced homology of a facet file");
    std::string facets_path;
    homology->add_option("--facets", facets_path, "Facet-list file")->required();
    auto* planarity = complex->add_subcommand("planarity", "Planarity test with Kuratowski witness");
    std::string graph_path;
    planarity->add_option("--graph", graph_path, "Edge-list file")->required();
    auto* incidence = complex->add_subcommand("incidence", "Boundary incidence graph and join witness");
    std::string inc_config, inc_out;
    incidence->add_option("--config", inc_config, "Configuration file (default: built-in n = 2)");
    incidence->add_option("--out", inc_out, "Edge-list file for the circle graph");

    // boundary
    BoundaryArgs ba;
    auto* boundary = app.add_subcommand("boundary", "Boundary-map injectivity test on product-of-trees rays");
    boundary->add_option("--config", ba.config, "Configuration file (default: built-in)");
    boundary->add_option("--rays", ba.rays, "Ray file, one literal per line");
    boundary->add_option("--random", ba.random, "Number of seeded random rays");
    boundary->add_option("--seed", ba.seed, "Seed for --random");
    boundary->add_option("--horizon", ba.horizon, "Horizon")->check(CLI::PositiveNumber);
    boundary->add_option("--tol", ba.tol, "Required pairwise separation");
    boundary->add_option("--gap-from", ba.gap_from, "First horizon of the convergence gaps");
    boundary->add_option("--gap-to", ba.gap_to, "Last horizon of the convergence gaps (default: --horizon)");
    boundary->add_option("--report", ba.report, "Report file (a JSON twin goes to <report>.json)");

    // replay
    auto* replay = app.add_subcommand("replay", "Rerun a manifest and compare outputs byte for byte");
    std::string replay_path;
    replay->add_option("manifest", replay_path, "Manifest file")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitInput;
    }

    if (*replay) {
        try {
            return cmd_replay(replay_path, out, err);
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kExitInput;
        }
    }

    std::ostringstream captured;
    RunContext ctx(captured, err);
    ctx.threads = threads;
    int code = kExitOk;
    try {
        if (*cfg_new) {
            ctx.command = "config new";
            code = cmd_config_new(ctx, new_n, new_ell, new_out);
        } else if (*cfg_val) {
            ctx.command = "config validate";
            code = cmd_config_validate(ctx, val_path, val_depth);
        } else if (*certify) {
            ctx.command = "certify";
            code = cmd_certify(ctx, ca);
        } else if (*limitset) {
            ctx.command = "limitset";
            code = cmd_limitset(ctx, la);
        } else if (*join_k3) {
            ctx.command = "complex join-k3";
            code = cmd_join_k3(ctx, join_n, !join_action.empty(), join_out);
        } else if (*homology) {
            ctx.command = "complex homology";
            code = cmd_homology(ctx, facets_path);
        } else if (*planarity) {
            ctx.command = "complex planarity";
            code = cmd_planarity(ctx, graph_path);
        } else if (*incidence) {
            ctx.command = "complex incidence";
            code = cmd_incidence(ctx, inc_config, inc_out);
        } else if (*boundary) {
            ctx.command = "boundary";
            code = cmd_boundary(ctx, ba);
        }
    } catch (const Error& e) {
        out << captured.str();
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        out << captured.str();
        err << "error: " << e.what() << "\n";
        return kExitInput;
    }
    out << captured.str();

    if (!no_manifest) {
        try {
            const std::string where = manifest_location(ctx, manifest_path);
            std::ofstream f(where, std::ios::binary);
            if (!f) throw Error(ErrorCode::IoError, "cannot write " + where);
            f << build_manifest(ctx, args, captured.str(), code).dump(2) << "\n";
            if (!f) throw Error(ErrorCode::IoError, "cannot write " + where);
            err << "manifest: " << where << "\n";
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kExitInput;
        }
    }
    return code;
}

}  // namespace

std::string file_sha256(const std::string& path) { return sha256_hex(read_file(path)); }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    return run_commands(args, out, err);
}

}  // namespace kleinian
