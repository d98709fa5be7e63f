#include "kleinian/configuration.hpp"

#include "kleinian/errors.hpp"
#include "kleinian/parallel.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace kleinian {

double constant_L() { return 2.0 * std::acosh(2.0 * std::sqrt(2.0)) + 1.0; }

Configuration::Configuration(int n, double ell, std::vector<double> frame)
    : n_(n), ell_(ell), frame_(std::move(frame)) {}

Configuration build_configuration(int n, double ell) {
    if (n < 1) throw Error(ErrorCode::InvalidParameters, "n must be >= 1");
    if (!std::isfinite(ell) || ell <= 0) throw Error(ErrorCode::InvalidParameters, "ell must be positive and finite");
    int size = 2 * n + 1;
    std::vector<double> frame(static_cast<size_t>(size * size), 0.0);
    for (int i = 0; i < size; ++i) frame[static_cast<size_t>(i * size + i)] = 1.0;
    return Configuration(n, ell, std::move(frame));
}

Mat Configuration::frame() const {
    int size = matrix_size();
    Mat f(size, size);
    bool identity = true;
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) {
            double v = frame_[static_cast<size_t>(i * size + j)];
            f(i, j) = v;
            if (v != (i == j ? 1.0 : 0.0)) identity = false;
        }
    if (identity) return f;
    // Stored entries are rounded to double; restore an exact isometry at
    // the current precision so long products do not inherit the rounding.
    return reorthonormalize(f).matrix();
}

HPoint Configuration::base() const { return HPoint::normalized(Mat(frame()).col(0)); }

Geodesic Configuration::axis(int j, int s) const {
    if (j < 1 || j > n_ || (s != 0 && s != 1)) throw Error(ErrorCode::InvalidParameters, "axis index out of range");
    Mat f = frame();
    return Geodesic(HPoint::normalized(f.col(0)), f.col(axis_coordinate(j, s)));
}

GeodesicSubspace Configuration::plane(const Plane& b) const {
    if (static_cast<int>(b.size()) != n_ || b.find_first_not_of("01") != std::string::npos)
        throw Error(ErrorCode::UnknownPlane, "no plane '" + b + "' for n = " + std::to_string(n_));
    Mat f = frame();
    Mat basis(matrix_size(), n_ + 1);
    basis.col(0) = f.col(0);
    for (int j = 1; j <= n_; ++j) basis.col(j) = f.col(axis_coordinate(j, b[static_cast<size_t>(j - 1)] - '0'));
    return GeodesicSubspace(std::move(basis));
}

std::vector<Plane> Configuration::planes() const {
    std::vector<Plane> out;
    for (unsigned mask = 0; mask < (1u << n_); ++mask) {
        Plane b(static_cast<size_t>(n_), '0');
        for (int j = 0; j < n_; ++j)
            if (mask & (1u << (n_ - 1 - j))) b[static_cast<size_t>(j)] = '1';
        out.push_back(b);
    }
    return out;
}

Mat Configuration::generator(int j, int s, int exp) const {
    Real len = Real(ell_);
    if (s == 1) len *= (1 + sqrt(Real(5))) / 2;
    if (exp < 0) len = -len;
    return translation_along(axis(j, s), len).matrix();
}

Mat Configuration::word_isometry(const Word& w) const {
    validate_word(w, n_);
    IsometryAccumulator acc(ambient_dim());
    for (const Letter& l : w) acc.multiply_right(letter(l));
    return acc.value();
}

double Configuration::word_length_bound(const Word& w) const {
    double total = 0;
    for (const Letter& l : w) total += generator_length(l.gen);
    return total;
}

Configuration Configuration::conjugated(const Mat& q) const {
    if (q.rows() != matrix_size() || q.cols() != matrix_size())
        throw Error(ErrorCode::DimensionMismatch, "conjugating matrix has the wrong size");
    Mat f = q * frame();
    int size = matrix_size();
    std::vector<double> entries(static_cast<size_t>(size * size));
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) entries[static_cast<size_t>(i * size + j)] = to_double(f(i, j));
    return Configuration(n_, ell_, std::move(entries));
}

// ------------------------------------------------------------ validation

std::vector<Word> reduced_sequences(int n, int depth) {
    std::vector<Letter> letters;
    for (int j = 1; j <= n; ++j)
        for (int s = 0; s <= 1; ++s)
            for (int e : {1, -1}) letters.push_back(Letter{j, s, e});
    std::vector<Word> out, layer{Word{}};
    for (int d = 1; d <= depth; ++d) {
        std::vector<Word> next;
        for (const Word& w : layer)
            for (const Letter& l : letters) {
                if (!w.empty() && w.back() == l.inverse()) continue;
                Word x = w;
                x.push_back(l);
                next.push_back(std::move(x));
            }
        out.insert(out.end(), next.begin(), next.end());
        layer = std::move(next);
    }
    return out;
}

namespace {

std::string axis_name(int j, int s) { return std::string(s == 0 ? "gamma_" : "gamma'_") + std::to_string(j); }

}  // namespace

ValidationReport inspect_configuration(const Configuration& c, int depth, int threads) {
    if (depth < 1) throw Error(ErrorCode::InvalidParameters, "validation depth must be >= 1");
    PrecisionGuard guard(bits_for_distance(depth * c.max_letter_length() + 10));
    ValidationReport rep;
    rep.depth = depth;

    std::vector<Geodesic> axes;
    std::vector<std::string> names;
    for (int j = 1; j <= c.n(); ++j)
        for (int s = 0; s <= 1; ++s) {
            axes.push_back(c.axis(j, s));
            names.push_back(axis_name(j, s));
        }
    Real ortho = 0;
    for (size_t a = 0; a < axes.size(); ++a)
        for (size_t b = a + 1; b < axes.size(); ++b)
            ortho = std::max(ortho, Real(abs(mink_inner(axes[a].dir(), axes[b].dir()))));
    rep.orthogonality_residual = to_double(ortho);

    auto planes = c.planes();
    SubspaceIntersection common = c.plane(planes[0]);
    for (size_t i = 1; i < planes.size(); ++i) {
        if (auto* s = std::get_if<GeodesicSubspace>(&common)) common = subspace_intersection(*s, c.plane(planes[i]));
    }
    if (auto* p = std::get_if<HPoint>(&common))
        rep.intersection_residual = to_double(dist(*p, c.base()));
    else
        rep.intersection_residual = std::numeric_limits<double>::infinity();

    const std::vector<Word> words = reduced_sequences(c.n(), depth);
    rep.words_checked = static_cast<long>(words.size());
    std::vector<double> sep(words.size() * axes.size(), std::numeric_limits<double>::infinity());
    std::vector<Mat> isos(words.size());
    parallel_for(words.size(), threads, [&](size_t w) { isos[w] = c.word_isometry(words[w]); });
    parallel_for(sep.size(), threads, [&](size_t k) {
        size_t w = k / axes.size(), a = k % axes.size();
        Geodesic moved = axes[a].transformed(isos[w]);
        if (same_geodesic(axes[a], moved)) return;  // h(gamma) = gamma is exempt
        try {
            sep[k] = to_double(common_perpendicular(axes[a], moved).length);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::IntersectingGeodesics && e.code() != ErrorCode::AsymptoticGeodesics) throw;
            sep[k] = 0.0;
        }
    });
    rep.min_separation = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < sep.size(); ++k) {
        if (sep[k] == std::numeric_limits<double>::infinity()) continue;
        ++rep.pairs_checked;
        if (sep[k] < rep.min_separation) {
            rep.min_separation = sep[k];
            rep.min_word = format_word(words[k / axes.size()]);
            rep.min_axis = names[k % axes.size()];
        }
    }
    const double need = 3.0 * constant_L();
    rep.passed = true;
    if (rep.orthogonality_residual > kInvariantTol || rep.intersection_residual > kInvariantTol) {
        rep.passed = false;
        rep.violation = "axes not orthogonal at O or planes do not meet in the single point O";
    } else if (rep.min_separation < need) {
        rep.passed = false;
        rep.violation = "word '" + rep.min_word + "' moves " + rep.min_axis + " to distance " +
                        std::to_string(rep.min_separation) + " < 3L";
    }
    return rep;
}

ValidationReport validate_configuration(const Configuration& c, int depth, int threads) {
    ValidationReport rep = inspect_configuration(c, depth, threads);
    if (!rep.passed) {
        ErrorCode code = rep.min_separation < 3.0 * constant_L() && rep.orthogonality_residual <= kInvariantTol &&
                                 rep.intersection_residual <= kInvariantTol
                             ? ErrorCode::SeparationViolation
                             : ErrorCode::OrthogonalityViolation;
        throw ValidationError(code, *rep.violation, rep);
    }
    return rep;
}

// ------------------------------------------------------------------ JSON

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string array(const std::vector<double>& xs) {
    std::string out = "[";
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ", ";
        out += num(xs[i]);
    }
    return out + "]";
}

std::vector<double> flatten(const Mat& m) {
    std::vector<double> out;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(to_double(m(i, j)));
    return out;
}

std::vector<double> flatten(const Vec& v) {
    std::vector<double> out;
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_double(v(i)));
    return out;
}

}  // namespace

std::string configuration_to_json(const Configuration& c) {
    PrecisionGuard guard(256);
    std::ostringstream os;
    os << "{\n";
    os << "  \"format\": \"kleinian-configuration\",\n";
    os << "  \"version\": 1,\n";
    os << "  \"n\": " << c.n() << ",\n";
    os << "  \"ell\": " << num(c.ell()) << ",\n";
    os << "  \"L\": " << num(constant_L()) << ",\n";
    os << "  \"frame\": " << array(c.frame_entries()) << ",\n";
    os << "  \"base\": " << array(flatten(c.base().v())) << ",\n";
    os << "  \"axes\": [\n";
    for (int j = 1; j <= c.n(); ++j)
        for (int s = 0; s <= 1; ++s) {
            Geodesic g = c.axis(j, s);
            os << "    {\"factor\": " << j << ", \"gen\": " << s << ", \"dir\": " << array(flatten(g.dir())) << "}"
               << (j == c.n() && s == 1 ? "\n" : ",\n");
        }
    os << "  ],\n";
    os << "  \"generators\": [\n";
    for (int j = 1; j <= c.n(); ++j)
        for (int s = 0; s <= 1; ++s) {
            os << "    {\"factor\": " << j << ", \"gen\": " << s << ", \"length\": " << num(c.generator_length(s))
               << ", \"matrix\": " << array(flatten(c.generator(j, s))) << "}"
               << (j == c.n() && s == 1 ? "\n" : ",\n");
        }
    os << "  ]\n";
    os << "}\n";
    return os.str();
}

Configuration configuration_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("configuration is not valid JSON: ") + e.what());
    }
    try {
        if (doc.value("format", std::string()) != "kleinian-configuration")
            throw Error(ErrorCode::ParseError, "missing or wrong \"format\" field");
        int n = doc.at("n").get<int>();
        double ell = doc.at("ell").get<double>();
        Configuration c = build_configuration(n, ell);
        if (doc.contains("frame")) {
            auto frame = doc.at("frame").get<std::vector<double>>();
            if (frame.size() != c.frame_.size()) throw Error(ErrorCode::ParseError, "frame has the wrong size");
            c.frame_ = frame;
        }
        PrecisionGuard guard(256);
        // Generator matrices are derived data; a mismatch means the file was
        // edited inconsistently.
        if (doc.contains("generators")) {
            for (const auto& g : doc.at("generators")) {
                int j = g.at("factor").get<int>(), s = g.at("gen").get<int>();
                auto stored = g.at("matrix").get<std::vector<double>>();
                auto derived = flatten(c.generator(j, s));
                if (stored.size() != derived.size())
                    throw Error(ErrorCode::ParseError, "generator matrix has the wrong size");
                for (size_t k = 0; k < stored.size(); ++k) {
                    double scale = std::max(1.0, std::abs(derived[k]));
                    if (std::abs(stored[k] - derived[k]) > 1e-9 * scale)
                        throw Error(ErrorCode::ParseError, "generator matrix disagrees with (n, ell, frame)");
                }
            }
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("configuration field error: ") + e.what());
    }
}

void save_configuration(const Configuration& c, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << configuration_to_json(c);
}

Configuration load_configuration(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return configuration_from_json(ss.str());
}

}  // namespace kleinian
