#pragma once
// Synthetic universal-cover data: 2^n coordinate H^n-planes of H^{2n}
// through O, 2n orthogonal axes, and loxodromic generators along them.

#include "kleinian/errors.hpp"
#include "kleinian/hyperboloid.hpp"
#include "kleinian/words.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kleinian {

double constant_L();
inline double constant_A() { return 18.0 * constant_L(); }
inline double constant_B() { return 4.0 + 12.0 * constant_L(); }
inline double golden_ratio() { return 1.6180339887498948482; }

// Defined by (n, ell, frame); every matrix is derived on demand at the
// current working precision, so far-reaching products stay exact to it.
class Configuration {
public:
    int n() const { return n_; }
    double ell() const { return ell_; }
    int ambient_dim() const { return 2 * n_; }
    int matrix_size() const { return 2 * n_ + 1; }
    // Row-major (2n+1)^2 frame; identity for built configurations.
    const std::vector<double>& frame_entries() const { return frame_; }

    Mat frame() const;
    HPoint base() const;
    // axis(j, 0) is gamma_j along e_{2j-1}; axis(j, 1) is gamma'_j along e_{2j}.
    Geodesic axis(int j, int s) const;
    // Coordinate index (1-based, within R^{2n}) of axis (j, s).
    static int axis_coordinate(int j, int s) { return 2 * j - 1 + s; }
    GeodesicSubspace plane(const Plane& b) const;
    std::vector<Plane> planes() const;
    double generator_length(int s) const { return s == 0 ? ell_ : ell_ * golden_ratio(); }
    double max_letter_length() const { return ell_ * golden_ratio(); }
    Mat generator(int j, int s, int exp = 1) const;
    Mat letter(const Letter& l) const { return generator(l.factor, l.gen, l.exp); }
    // Ordered product of the letters (renormalized every 64 factors).
    Mat word_isometry(const Word& w) const;
    // Isometry of the group element: the letter product of its normal form.
    Mat element_isometry(const Word& w) const { return word_isometry(reduce(w)); }
    // Upper bound on how far the letters of w can move O.
    double word_length_bound(const Word& w) const;

    Configuration conjugated(const Mat& q) const;

    friend Configuration build_configuration(int n, double ell);
    friend Configuration configuration_from_json(const std::string& text);

private:
    Configuration(int n, double ell, std::vector<double> frame);
    int n_;
    double ell_;
    std::vector<double> frame_;
};

Configuration build_configuration(int n, double ell);
inline Configuration build_configuration(int n) { return build_configuration(n, 6.0 * constant_L()); }

struct ValidationReport {
    int depth = 0;
    long words_checked = 0;
    long pairs_checked = 0;
    double min_separation = 0;  // over all (axis, word) with h(axis) != axis
    std::string min_word;
    std::string min_axis;
    double orthogonality_residual = 0;   // max |<dir_a, dir_b>| over axis pairs
    double intersection_residual = 0;    // distance of the common point of all planes to O
    bool passed = false;
    std::optional<std::string> violation;  // offending word when failing
};

class ValidationError : public Error {
public:
    ValidationError(ErrorCode code, const std::string& msg, ValidationReport report)
        : Error(code, msg), report_(std::move(report)) {}
    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

// Checks dist(gamma, h(gamma)) >= 3L for every axis and every nontrivial
// freely reduced letter sequence h of length <= depth with h(gamma) != gamma.
// Throws ValidationError (SeparationViolation / OrthogonalityViolation).
ValidationReport validate_configuration(const Configuration& c, int depth, int threads = 0);
// Same checks without throwing; `passed` and `violation` carry the verdict.
ValidationReport inspect_configuration(const Configuration& c, int depth, int threads = 0);

// All freely reduced letter sequences with 1..depth letters, shortlex.
std::vector<Word> reduced_sequences(int n, int depth);

// JSON text (17 significant digits, stable key order) and its parser.
std::string configuration_to_json(const Configuration& c);
Configuration configuration_from_json(const std::string& text);
void save_configuration(const Configuration& c, const std::string& path);
Configuration load_configuration(const std::string& path);

}  // namespace kleinian
