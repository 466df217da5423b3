#ifndef NETDYN_DYNAMICS_HPP
#define NETDYN_DYNAMICS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netdyn/series.hpp"

namespace netdyn {

/// Delay-coordinate reconstruction: point n is
/// [s(n), s(n+T), ..., s(n+T*(dim-1))], stored row-major.
struct DelayVectors {
    int dim = 0;
    int delay = 0;
    std::vector<double> data;

    std::size_t count() const { return dim ? data.size() / dim : 0; }
    const double* point(std::size_t n) const { return data.data() + n * dim; }
    double at(std::size_t n, int j) const { return data[n * dim + j]; }
};

/// Projection of delay vectors onto 2 or 3 chosen components.
struct PointSet {
    int dim = 0;
    std::vector<double> data;

    std::size_t count() const { return dim ? data.size() / dim : 0; }
    const double* point(std::size_t n) const { return data.data() + n * dim; }
};

/// Build the delay vectors for embedding dimension d and delay T (both in
/// samples). Requires series length >= T*(d-1) + 1; throws
/// InsufficientDataError (reporting the minimum) otherwise.
DelayVectors embed(const TimeSeries& series, int d, int T);

struct FnnResult {
    double fraction = 0.0;    ///< false neighbors / tested points
    std::size_t tested = 0;   ///< points that had an admissible neighbor
};

inline constexpr double kDefaultRtol = 15.0;
inline constexpr double kDefaultAtol = 2.0;
inline constexpr double kDefaultFnnThreshold = 0.05;

/// False-nearest-neighbor fraction at dimension d. For each point of the
/// d-dimensional reconstruction (restricted to points that can be lifted to
/// d+1), the nearest neighbor under the Euclidean metric is found, excluding
/// self and indices within the Theiler window (default: T samples). The
/// neighbor pair (n, m) is false when
///   |s(n+dT) - s(m+dT)| / R_d(n,m) > r_tol, or
///   R_{d+1}(n,m) / A > a_tol
/// with R_d the d-dimensional pair distance and A the series' standard
/// deviation. Both tests are evaluated in squared form.
///
/// Throws DegenerateSeriesError on zero variance and InsufficientDataError
/// when fewer than 10 points can be lifted.
FnnResult fnn_fraction(const TimeSeries& series, int d, int T,
                       double r_tol = kDefaultRtol, double a_tol = kDefaultAtol,
                       int theiler = -1);

struct FnnPoint {
    int dim = 0;
    double fraction = 0.0;
    std::size_t neighbors = 0; ///< tested-point count behind the fraction
};

struct FnnCurve {
    std::vector<FnnPoint> points;
    std::vector<int> insufficient; ///< dimensions skipped for lack of data
};

/// fnn_fraction for d = 1..d_max. Dimensions without enough data are skipped
/// and recorded in `insufficient` instead of aborting the curve.
FnnCurve fnn_curve(const TimeSeries& series, int d_max, int T,
                   double r_tol = kDefaultRtol, double a_tol = kDefaultAtol,
                   int theiler = -1);

/// Smallest dimension whose FNN fraction is <= threshold; nullopt when the
/// curve never crosses.
std::optional<int> estimate_dimension(const FnnCurve& curve, double threshold);

/// Delay at the first local minimum of the autocorrelation function
/// (smallest k >= 1 with acf(k) < acf(k+1)); falls back to the lag of the
/// smallest acf value when the function is monotone over the scanned range.
/// max_lag <= 0 selects min(N/2, 400).
int autocorr_first_min_delay(const TimeSeries& series, int max_lag = 0);

/// Coordinate selection onto 2 or 3 axes; order preserved.
/// Throws std::out_of_range when an axis index >= vectors.dim.
PointSet project(const DelayVectors& vectors, const std::vector<int>& axes);

/// Grid histogram of a normal-traffic trajectory in a low-dimensional
/// projection, used to score how far new points stray from visited cells.
struct OccupancyModel {
    std::vector<int> axes;
    std::vector<int> resolution;         ///< per axis, >= 2
    std::vector<double> lo, hi;          ///< value bounds per axis
    std::vector<std::uint32_t> counts;   ///< row-major visit counts
    std::uint64_t total = 0;

    int grid_dim() const { return static_cast<int>(resolution.size()); }
    /// Cell coordinate for a value on one axis; out-of-bounds values clamp
    /// to the edge cells.
    int cell_of(int axis, double value) const;

    // flat list of occupied cell coordinates, rebuilt by finalize()
    std::vector<int> occupied;
    void finalize();
};

/// Fit the occupancy grid from a training trajectory. Bounds come from the
/// projection's min/max (collapsed bounds are widened to unit size); each
/// training point increments its cell, boundary values land in the last
/// cell. Requires >= 100 points.
OccupancyModel fit_occupancy(const DelayVectors& vectors,
                             const std::vector<int>& axes,
                             const std::vector<int>& resolution);

/// 0 when the point's cell was visited during training, otherwise the
/// Chebyshev cell distance to the nearest occupied cell. Points outside the
/// bounds clamp to edge cells first. Throws ShapeError on a dimension
/// mismatch.
double novelty_score(const OccupancyModel& model, const std::vector<double>& point);

/// Versioned text serialization of a fitted model, together with the
/// embedding settings it was built from (0 = unspecified).
struct BaselineFile {
    int embed_dim = 0;
    int embed_delay = 0;
    OccupancyModel model;
};

std::string baseline_to_text(const BaselineFile& file);
BaselineFile baseline_from_text(const std::string& text);

/// CSV export: one point per row, columns c0..c{dim-1} (delay vectors) or
/// x,y[,z] (projections).
std::string vectors_to_csv(const DelayVectors& vectors);
std::string points_to_csv(const PointSet& points);
DelayVectors vectors_from_csv(const std::string& text);

/// FnnCurve CSV: columns d,fraction,neighbors.
std::string fnn_curve_to_csv(const FnnCurve& curve);

} // namespace netdyn

#endif // NETDYN_DYNAMICS_HPP
