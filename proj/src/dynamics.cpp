#include "netdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "netdyn/errors.hpp"
#include "netdyn/kdtree.hpp"
#include "netdyn/textio.hpp"

namespace netdyn {

namespace {

double population_stddev(const std::vector<double>& v)
{
    if (v.empty())
        return 0.0;
    double mean = 0.0;
    for (double x : v)
        mean += x;
    mean /= double(v.size());
    double ss = 0.0;
    for (double x : v)
        ss += (x - mean) * (x - mean);
    return std::sqrt(ss / double(v.size()));
}

} // namespace

DelayVectors embed(const TimeSeries& series, int d, int T)
{
    if (d < 1 || T < 1)
        throw Error("embed: d and T must be positive");
    const std::size_t n = series.values.size();
    const std::size_t need = std::size_t(T) * std::size_t(d - 1) + 1;
    if (n < need)
        throw InsufficientDataError(
            "embed: series length " + std::to_string(n) + " < minimum " +
            std::to_string(need) + " for d=" + std::to_string(d) +
            ", T=" + std::to_string(T));

    DelayVectors out;
    out.dim = d;
    out.delay = T;
    const std::size_t count = n - std::size_t(T) * std::size_t(d - 1);
    out.data.resize(count * std::size_t(d));
    for (std::size_t i = 0; i < count; ++i)
        for (int j = 0; j < d; ++j)
            out.data[i * d + j] = series.values[i + std::size_t(j) * T];
    return out;
}

FnnResult fnn_fraction(const TimeSeries& series, int d, int T, double r_tol,
                       double a_tol, int theiler)
{
    if (d < 1 || T < 1)
        throw Error("fnn_fraction: d and T must be positive");
    if (theiler < 0)
        theiler = T;

    const std::vector<double>& s = series.values;
    const double sigma = population_stddev(s);
    if (sigma == 0.0)
        throw DegenerateSeriesError("fnn_fraction: series variance is zero");

    const std::size_t n = s.size();
    const std::size_t span = std::size_t(d) * std::size_t(T);
    if (n <= span || n - span < 10)
        throw InsufficientDataError(
            "fnn_fraction: fewer than 10 points can be lifted to d+1 (need "
            "series length >= " + std::to_string(span + 10) + ")");
    // points usable both at d and at d+1
    const std::size_t m = n - span;

    std::vector<double> flat(m * std::size_t(d));
    for (std::size_t i = 0; i < m; ++i)
        for (int j = 0; j < d; ++j)
            flat[i * d + j] = s[i + std::size_t(j) * T];

    KdTree tree(flat.data(), m, std::size_t(d));
    const double r2 = r_tol * r_tol;
    const double a2 = a_tol * a_tol * sigma * sigma;

    std::size_t tested = 0;
    std::size_t false_count = 0;
    for (std::size_t i = 0; i < m; ++i) {
        auto hit = tree.nearest(i, std::size_t(theiler));
        if (!hit)
            continue;
        ++tested;
        const double dist2 = hit->dist2;
        const double delta = std::abs(s[i + span] - s[hit->index + span]);
        const double delta2 = delta * delta;
        // both criteria compared in squared form
        const bool stretched = dist2 > 0.0 ? delta2 > r2 * dist2 : delta > 0.0;
        const bool escaped = dist2 + delta2 > a2;
        if (stretched || escaped)
            ++false_count;
    }
    if (tested == 0)
        throw InsufficientDataError("fnn_fraction: no admissible neighbor pairs");
    return {double(false_count) / double(tested), tested};
}

FnnCurve fnn_curve(const TimeSeries& series, int d_max, int T, double r_tol,
                   double a_tol, int theiler)
{
    if (d_max < 1)
        throw Error("fnn_curve: d_max must be >= 1");
    FnnCurve curve;
    for (int d = 1; d <= d_max; ++d) {
        try {
            FnnResult r = fnn_fraction(series, d, T, r_tol, a_tol, theiler);
            curve.points.push_back({d, r.fraction, r.tested});
        } catch (const InsufficientDataError&) {
            curve.insufficient.push_back(d);
        }
    }
    return curve;
}

std::optional<int> estimate_dimension(const FnnCurve& curve, double threshold)
{
    for (const FnnPoint& p : curve.points)
        if (p.fraction <= threshold)
            return p.dim;
    return std::nullopt;
}

int autocorr_first_min_delay(const TimeSeries& series, int max_lag)
{
    const std::vector<double>& s = series.values;
    const std::size_t n = s.size();
    if (n < 4)
        throw InsufficientDataError("autocorrelation: series too short");

    double mean = 0.0;
    for (double x : s)
        mean += x;
    mean /= double(n);
    double denom = 0.0;
    for (double x : s)
        denom += (x - mean) * (x - mean);
    if (denom == 0.0)
        throw DegenerateSeriesError("autocorrelation: series variance is zero");

    if (max_lag <= 0)
        max_lag = static_cast<int>(std::min<std::size_t>(n / 2, 400));
    max_lag = std::min<int>(max_lag, static_cast<int>(n) - 2);

    std::vector<double> acf(std::size_t(max_lag) + 1, 0.0);
    for (int k = 1; k <= max_lag; ++k) {
        double num = 0.0;
        for (std::size_t i = 0; i + std::size_t(k) < n; ++i)
            num += (s[i] - mean) * (s[i + k] - mean);
        acf[k] = num / denom;
    }

    for (int k = 1; k < max_lag; ++k)
        if (acf[k] < acf[k + 1])
            return k;
    int best = 1;
    for (int k = 2; k <= max_lag; ++k)
        if (acf[k] < acf[best])
            best = k;
    return best;
}

PointSet project(const DelayVectors& vectors, const std::vector<int>& axes)
{
    if (axes.size() != 2 && axes.size() != 3)
        throw Error("project: need 2 or 3 axis indices");
    for (int a : axes)
        if (a < 0 || a >= vectors.dim)
            throw std::out_of_range("project: axis " + std::to_string(a) +
                                    " out of range for d=" +
                                    std::to_string(vectors.dim));

    PointSet out;
    out.dim = static_cast<int>(axes.size());
    out.data.resize(vectors.count() * axes.size());
    for (std::size_t i = 0; i < vectors.count(); ++i)
        for (std::size_t j = 0; j < axes.size(); ++j)
            out.data[i * axes.size() + j] = vectors.at(i, axes[j]);
    return out;
}

int OccupancyModel::cell_of(int axis, double value) const
{
    const double width = hi[axis] - lo[axis];
    int cell = static_cast<int>(std::floor((value - lo[axis]) / width *
                                           double(resolution[axis])));
    if (cell < 0)
        cell = 0;
    if (cell >= resolution[axis])
        cell = resolution[axis] - 1; // boundary and beyond-bounds values
    return cell;
}

void OccupancyModel::finalize()
{
    occupied.clear();
    const int nd = grid_dim();
    std::vector<int> coord(nd, 0);
    for (std::size_t flat = 0; flat < counts.size(); ++flat) {
        if (counts[flat] > 0) {
            std::size_t rest = flat;
            for (int a = nd - 1; a >= 0; --a) {
                coord[a] = static_cast<int>(rest % std::size_t(resolution[a]));
                rest /= std::size_t(resolution[a]);
            }
            occupied.insert(occupied.end(), coord.begin(), coord.end());
        }
    }
}

OccupancyModel fit_occupancy(const DelayVectors& vectors,
                             const std::vector<int>& axes,
                             const std::vector<int>& resolution)
{
    if (vectors.count() < 100)
        throw InsufficientDataError("fit_occupancy: need at least 100 points, got " +
                                    std::to_string(vectors.count()));
    PointSet pts = project(vectors, axes);
    const int nd = pts.dim;
    if (resolution.size() != std::size_t(nd))
        throw Error("fit_occupancy: one resolution per axis required");
    for (int r : resolution)
        if (r < 2)
            throw Error("fit_occupancy: resolution must be >= 2 per axis");

    OccupancyModel model;
    model.axes = axes;
    model.resolution = resolution;
    model.lo.assign(nd, 0.0);
    model.hi.assign(nd, 0.0);
    for (int a = 0; a < nd; ++a) {
        double lo = pts.point(0)[a];
        double hi = lo;
        for (std::size_t i = 1; i < pts.count(); ++i) {
            lo = std::min(lo, pts.point(i)[a]);
            hi = std::max(hi, pts.point(i)[a]);
        }
        if (hi == lo)
            hi = lo + 1.0; // collapsed bounds: unit-width axis
        model.lo[a] = lo;
        model.hi[a] = hi;
    }

    std::size_t cells = 1;
    for (int r : resolution)
        cells *= std::size_t(r);
    model.counts.assign(cells, 0);
    for (std::size_t i = 0; i < pts.count(); ++i) {
        std::size_t flat = 0;
        for (int a = 0; a < nd; ++a)
            flat = flat * std::size_t(resolution[a]) +
                   std::size_t(model.cell_of(a, pts.point(i)[a]));
        ++model.counts[flat];
    }
    model.total = pts.count();
    model.finalize();
    return model;
}

double novelty_score(const OccupancyModel& model, const std::vector<double>& point)
{
    const int nd = model.grid_dim();
    if (point.size() != std::size_t(nd))
        throw ShapeError("novelty_score: point has " + std::to_string(point.size()) +
                         " components, model expects " + std::to_string(nd));

    std::vector<int> cell(nd);
    std::size_t flat = 0;
    for (int a = 0; a < nd; ++a) {
        cell[a] = model.cell_of(a, point[a]);
        flat = flat * std::size_t(model.resolution[a]) + std::size_t(cell[a]);
    }
    if (model.counts[flat] > 0)
        return 0.0;

    // Chebyshev distance to the nearest occupied cell.
    int best = -1;
    const std::size_t n_occ = model.occupied.size() / std::size_t(nd);
    for (std::size_t i = 0; i < n_occ; ++i) {
        int dist = 0;
        for (int a = 0; a < nd; ++a)
            dist = std::max(dist, std::abs(model.occupied[i * nd + a] - cell[a]));
        if (best < 0 || dist < best)
            best = dist;
    }
    return best < 0 ? 0.0 : double(best);
}

std::string baseline_to_text(const BaselineFile& file)
{
    const OccupancyModel& m = file.model;
    std::string out = "netdyn-occupancy v1\n";
    out += "embed_d " + std::to_string(file.embed_dim) + "\n";
    out += "embed_T " + std::to_string(file.embed_delay) + "\n";
    auto join_ints = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? " " : "") + std::to_string(v[i]);
        return s;
    };
    out += "axes " + join_ints(m.axes) + "\n";
    out += "resolution " + join_ints(m.resolution) + "\n";
    out += "lo";
    for (double v : m.lo)
        out += " " + format_number(v);
    out += "\nhi";
    for (double v : m.hi)
        out += " " + format_number(v);
    out += "\ntotal " + std::to_string(m.total) + "\n";

    std::size_t occupied_cells = 0;
    for (std::uint32_t c : m.counts)
        if (c > 0)
            ++occupied_cells;
    out += "cells " + std::to_string(occupied_cells) + "\n";
    const int nd = m.grid_dim();
    std::vector<int> coord(nd, 0);
    for (std::size_t flat = 0; flat < m.counts.size(); ++flat) {
        if (m.counts[flat] == 0)
            continue;
        std::size_t rest = flat;
        for (int a = nd - 1; a >= 0; --a) {
            coord[a] = static_cast<int>(rest % std::size_t(m.resolution[a]));
            rest /= std::size_t(m.resolution[a]);
        }
        for (int a = 0; a < nd; ++a)
            out += std::to_string(coord[a]) + " ";
        out += std::to_string(m.counts[flat]) + "\n";
    }
    return out;
}

BaselineFile baseline_from_text(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "netdyn-occupancy v1")
        throw IoError("baseline file: missing 'netdyn-occupancy v1' header");

    BaselineFile file;
    OccupancyModel& m = file.model;
    std::size_t expected_cells = 0;
    auto next_line = [&](const std::string& key) -> std::istringstream {
        if (!std::getline(in, line))
            throw IoError("baseline file: unexpected end before '" + key + "'");
        std::istringstream ls(line);
        std::string got;
        ls >> got;
        if (got != key)
            throw IoError("baseline file: expected '" + key + "', got '" + got + "'");
        return ls;
    };

    { auto ls = next_line("embed_d"); ls >> file.embed_dim; }
    { auto ls = next_line("embed_T"); ls >> file.embed_delay; }
    {
        auto ls = next_line("axes");
        int v;
        while (ls >> v)
            m.axes.push_back(v);
    }
    {
        auto ls = next_line("resolution");
        int v;
        while (ls >> v)
            m.resolution.push_back(v);
    }
    {
        auto ls = next_line("lo");
        double v;
        while (ls >> v)
            m.lo.push_back(v);
    }
    {
        auto ls = next_line("hi");
        double v;
        while (ls >> v)
            m.hi.push_back(v);
    }
    { auto ls = next_line("total"); ls >> m.total; }
    { auto ls = next_line("cells"); ls >> expected_cells; }

    const int nd = m.grid_dim();
    if (nd < 2 || nd > 3 || m.lo.size() != std::size_t(nd) ||
        m.hi.size() != std::size_t(nd))
        throw IoError("baseline file: inconsistent axis metadata");
    std::size_t cells = 1;
    for (int r : m.resolution) {
        if (r < 2)
            throw IoError("baseline file: resolution must be >= 2");
        cells *= std::size_t(r);
    }
    m.counts.assign(cells, 0);
    for (std::size_t i = 0; i < expected_cells; ++i) {
        if (!std::getline(in, line))
            throw IoError("baseline file: fewer cell rows than declared");
        std::istringstream ls(line);
        std::vector<int> coord(nd);
        std::uint32_t count = 0;
        for (int a = 0; a < nd; ++a)
            if (!(ls >> coord[a]))
                throw IoError("baseline file: malformed cell row");
        if (!(ls >> count))
            throw IoError("baseline file: malformed cell row");
        std::size_t flat = 0;
        for (int a = 0; a < nd; ++a) {
            if (coord[a] < 0 || coord[a] >= m.resolution[a])
                throw IoError("baseline file: cell coordinate out of range");
            flat = flat * std::size_t(m.resolution[a]) + std::size_t(coord[a]);
        }
        m.counts[flat] = count;
    }
    m.finalize();
    return file;
}

std::string vectors_to_csv(const DelayVectors& vectors)
{
    std::string out;
    for (int j = 0; j < vectors.dim; ++j)
        out += (j ? ",c" : "c") + std::to_string(j);
    out += '\n';
    for (std::size_t i = 0; i < vectors.count(); ++i) {
        for (int j = 0; j < vectors.dim; ++j) {
            if (j)
                out += ',';
            out += format_number(vectors.at(i, j));
        }
        out += '\n';
    }
    return out;
}

std::string points_to_csv(const PointSet& points)
{
    static const char* const names[3] = {"x", "y", "z"};
    std::string out;
    for (int j = 0; j < points.dim; ++j) {
        if (j)
            out += ',';
        out += names[j];
    }
    out += '\n';
    for (std::size_t i = 0; i < points.count(); ++i) {
        for (int j = 0; j < points.dim; ++j) {
            if (j)
                out += ',';
            out += format_number(points.point(i)[j]);
        }
        out += '\n';
    }
    return out;
}

DelayVectors vectors_from_csv(const std::string& text)
{
    DelayVectors out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto fields = split_csv(line);
        if (lineno == 1 && !fields.empty() && !parse_double(fields[0])) {
            out.dim = static_cast<int>(fields.size()); // header row
            continue;
        }
        if (out.dim == 0)
            out.dim = static_cast<int>(fields.size());
        if (fields.size() != std::size_t(out.dim))
            throw IoError("vectors CSV line " + std::to_string(lineno) +
                          ": expected " + std::to_string(out.dim) + " columns");
        for (auto f : fields) {
            auto v = parse_double(f);
            if (!v)
                throw IoError("vectors CSV line " + std::to_string(lineno) +
                              ": malformed number");
            out.data.push_back(*v);
        }
    }
    if (out.data.empty())
        throw EmptyInputError("vectors CSV: no data rows");
    return out;
}

std::string fnn_curve_to_csv(const FnnCurve& curve)
{
    std::string out = "d,fraction,neighbors\n";
    for (const FnnPoint& p : curve.points) {
        out += std::to_string(p.dim);
        out += ',';
        out += format_number(p.fraction);
        out += ',';
        out += std::to_string(p.neighbors);
        out += '\n';
    }
    return out;
}

} // namespace netdyn
