#include "brownpoly/partition.hpp"

#include "brownpoly/logspace.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <stdexcept>

namespace brownpoly {

std::string_view to_string(TableKind kind)
{
    switch (kind) {
    case TableKind::forward_free: return "forward_free";
    case TableKind::forward_boundary: return "forward_boundary";
    case TableKind::backward: return "backward";
    case TableKind::forward_axis: return "forward_axis";
    case TableKind::boundary_continuous: return "boundary_continuous";
    case TableKind::boundary_atomic: return "boundary_atomic";
    }
    return "unknown";
}

LogPartitionTable::LogPartitionTable(TableKind kind, const GridSpec& grid, int levels, std::optional<double> theta)
    : kind_(kind), grid_(grid), levels_(levels), theta_(theta),
      values_(static_cast<std::size_t>(levels + 1) * static_cast<std::size_t>(grid.m + 1), kLogZero)
{
}

LogPartitionTable::LogPartitionTable(TableKind kind, const GridSpec& grid, int levels, std::optional<double> theta,
                                     std::vector<double> values)
    : kind_(kind), grid_(grid), levels_(levels), theta_(theta), values_(std::move(values))
{
    if (values_.size() != static_cast<std::size_t>(levels + 1) * static_cast<std::size_t>(grid.m + 1)) {
        throw std::invalid_argument("LogPartitionTable: value array does not match (levels+1)*(m+1)");
    }
}

std::span<const double> LogPartitionTable::row(int k) const
{
    return std::span<const double>(values_).subspan(index(k, 0), static_cast<std::size_t>(grid_.m + 1));
}

std::span<double> LogPartitionTable::row(int k)
{
    return std::span<double>(values_).subspan(index(k, 0), static_cast<std::size_t>(grid_.m + 1));
}

ExpIncrements::ExpIncrements(const Environment& env)
    : n_(env.levels()), m_(env.cells()), e_(env.all_level_increments().begin(), env.all_level_increments().end())
{
    for (auto& v : e_) v = std::exp(v);
}

ExpIncrements ExpIncrements::coarsened() const
{
    if (m_ % 2 != 0) throw std::invalid_argument("ExpIncrements::coarsened: m must be even");
    ExpIncrements out;
    out.n_ = n_;
    out.m_ = m_ / 2;
    out.e_.resize(static_cast<std::size_t>(n_) * out.m_);
    for (std::size_t j = 0; j < out.e_.size(); ++j) out.e_[j] = e_[2 * j] * e_[2 * j + 1];
    return out;
}

ScaledTable::ScaledTable(int levels_, int m_)
    : levels(levels_), m(m_), mant(static_cast<std::size_t>(levels_ + 1) * (m_ + 1), 0.0),
      scale(static_cast<std::size_t>(levels_ + 1) * (m_ / kBlock + 1), kLogZero)
{
}

double ScaledTable::log_at(int k, int i) const
{
    const double v = mant[static_cast<std::size_t>(k) * (m + 1) + i];
    return v > 0.0 ? scale[static_cast<std::size_t>(k) * blocks() + i / kBlock] + std::log(v) : kLogZero;
}

namespace {

constexpr int kBlock = ScaledTable::kBlock;

// Converts a row given in log form into scaled form, one scale per block.
void log_row_to_scaled(std::span<const double> logs, std::span<double> mant, std::span<double> scale)
{
    const int m = static_cast<int>(logs.size()) - 1;
    for (int b = 0; b * kBlock <= m; ++b) {
        const int i0 = b * kBlock;
        const int i1 = std::min(m, i0 + kBlock - 1);
        double s = kLogZero;
        for (int i = i0; i <= i1; ++i) s = std::max(s, logs[i]);
        scale[b] = s;
        for (int i = i0; i <= i1; ++i) mant[i] = s == kLogZero ? 0.0 : std::exp(logs[i] - s);
    }
}

// Rescaling at block starts keeps mantissas within a factor of about
// C(n + kBlock, kBlock) of one, far from the double range for any n we run.
double rescale(double acc, double from, double to)
{
    return acc > 0.0 ? acc * std::exp(from - to) : 0.0;
}

double inflow_factor(double delta, double src_scale, double dst_scale)
{
    return (src_scale == kLogZero || dst_scale == kLogZero) ? 0.0 : delta * std::exp(src_scale - dst_scale);
}

// One level of the forward recursion in scaled form:
//   Z_k(t_i) = e[i-1] * (Z_k(t_{i-1}) + delta * Z_{k-1}(t_{i-1})),  Z_k(t_0) = exp(start_log).
void forward_row(std::span<const double> pm, std::span<const double> ps, std::span<const double> e, double start_log,
                 double delta, std::span<double> cm, std::span<double> cs)
{
    const int m = static_cast<int>(e.size());
    const double log_delta = std::log(delta);
    double acc = 0.0;
    double s = kLogZero;
    for (int b = 0; b * kBlock <= m; ++b) {
        const int i0 = b * kBlock;
        const int i1 = std::min(m, i0 + kBlock - 1);
        const double in_prev = b > 0 ? ps[b - 1] : kLogZero;
        const double cand_acc = b == 0 ? start_log : (acc > 0.0 ? s + std::log(acc) : kLogZero);
        const double s_new = std::max(cand_acc, std::max(in_prev, ps[b]) + log_delta);
        acc = b == 0 ? (start_log == kLogZero ? 0.0 : std::exp(start_log - s_new)) : rescale(acc, s, s_new);
        s = s_new;
        cs[b] = s;
        const double f_prev = inflow_factor(delta, in_prev, s);
        const double f_this = inflow_factor(delta, ps[b], s);
        int i = i0;
        if (i == 0) {
            cm[0] = acc;
        } else {
            acc = e[i - 1] * (acc + f_prev * pm[i - 1]);
            cm[i] = acc;
        }
        for (++i; i <= i1; ++i) {
            acc = e[i - 1] * (acc + f_this * pm[i - 1]);
            cm[i] = acc;
        }
    }
}

// One level of the backward recursion in scaled form:
//   Z_k(t_i) = ek[i] * Z_k(t_{i+1}) + delta * en[i] * Z_{k+1}(t_{i+1}),  Z_k(t_m) = 0.
void backward_row(std::span<const double> nm, std::span<const double> ns, std::span<const double> ek,
                  std::span<const double> en, double delta, std::span<double> cm, std::span<double> cs)
{
    const int m = static_cast<int>(ek.size());
    const int nb = m / kBlock + 1;
    const double log_delta = std::log(delta);
    double acc = 0.0;
    double s = kLogZero;
    for (int b = nb - 1; b >= 0; --b) {
        const int i0 = b * kBlock;
        const int i1 = std::min(m, i0 + kBlock - 1);
        const double in_next = b + 1 < nb ? ns[b + 1] : kLogZero;
        const double cand_acc = acc > 0.0 ? s + std::log(acc) : kLogZero;
        const double s_new = std::max(cand_acc, std::max(in_next, ns[b]) + log_delta);
        acc = rescale(acc, s, s_new);
        s = s_new;
        cs[b] = s;
        const double f_next = inflow_factor(delta, in_next, s);
        const double f_this = inflow_factor(delta, ns[b], s);
        int i = i1;
        if (i == m) {
            cm[m] = 0.0;
        } else {
            acc = ek[i] * acc + f_next * en[i] * nm[i + 1];
            cm[i] = acc;
        }
        for (--i; i >= i0; --i) {
            acc = ek[i] * acc + f_this * en[i] * nm[i + 1];
            cm[i] = acc;
        }
    }
}

void sweep_forward(const ExpIncrements& e, double delta, std::span<const double> row0,
                   std::span<const double> col0, ScaledTable& table)
{
    log_row_to_scaled(row0, table.mant_row(0), table.scale_row(0));
    for (int k = 1; k <= e.levels(); ++k) {
        forward_row(table.mant_row(k - 1), table.scale_row(k - 1), e.level(k), col0[k - 1], delta,
                    table.mant_row(k), table.scale_row(k));
    }
}

double sweep_forward_endpoint(const ExpIncrements& e, double delta, std::span<const double> row0,
                              std::span<const double> col0)
{
    ScaledTable prev(0, e.cells());
    ScaledTable cur(0, e.cells());
    log_row_to_scaled(row0, prev.mant_row(0), prev.scale_row(0));
    for (int k = 1; k <= e.levels(); ++k) {
        forward_row(prev.mant_row(0), prev.scale_row(0), e.level(k), col0[k - 1], delta, cur.mant_row(0),
                    cur.scale_row(0));
        std::swap(prev, cur);
    }
    return prev.log_at(0, e.cells());
}

void to_log(const ScaledTable& scaled, LogPartitionTable& table)
{
    for (int k = 0; k <= scaled.levels; ++k) {
        auto row = table.row(k);
        for (int i = 0; i <= scaled.m; ++i) row[i] = scaled.log_at(k, i);
    }
}

LogPartitionTable build_forward(TableKind kind, const Environment& env, std::optional<double> theta,
                                std::span<const double> row0, std::span<const double> col0)
{
    ScaledTable scaled(env.levels(), env.cells());
    sweep_forward(ExpIncrements(env), env.grid().delta(), row0, col0, scaled);
    LogPartitionTable table(kind, env.grid(), env.levels(), theta);
    to_log(scaled, table);
    return table;
}

std::vector<double> boundary_row0(const Environment& env, double theta)
{
    auto b = env.boundary_path();
    const double delta = env.grid().delta();
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = -b[i] + theta * (static_cast<double>(i) * delta);
    return b;
}

std::vector<double> atom_column(const BoundaryWeights& w, int n)
{
    if (w.levels() < n) {
        throw std::invalid_argument("boundary weights provide " + std::to_string(w.levels()) + " levels, need "
                                    + std::to_string(n));
    }
    std::vector<double> col(static_cast<std::size_t>(n));
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) {
        acc += w.r(k);
        col[k - 1] = acc;
    }
    return col;
}

std::vector<double> free_column(int n)
{
    std::vector<double> col(static_cast<std::size_t>(n), kLogZero);
    col[0] = 0.0;
    return col;
}

} // namespace

LogPartitionTable forward_free(const Environment& env)
{
    const std::vector<double> row0(static_cast<std::size_t>(env.cells() + 1), kLogZero);
    return build_forward(TableKind::forward_free, env, std::nullopt, row0, free_column(env.levels()));
}

LogPartitionTable forward_boundary(const Environment& env, const BoundaryWeights& w)
{
    const auto col0 = atom_column(w, env.levels());
    return build_forward(TableKind::forward_boundary, env, w.theta, boundary_row0(env, w.theta), col0);
}

LogPartitionTable forward_axis(const Environment& env)
{
    auto row0 = env.boundary_path();
    for (auto& v : row0) v = -v;
    const std::vector<double> col0(static_cast<std::size_t>(env.levels()), kLogZero);
    return build_forward(TableKind::forward_axis, env, std::nullopt, row0, col0);
}

RestrictedTables forward_restricted(const Environment& env, const BoundaryWeights& w)
{
    const int n = env.levels();
    const auto atoms = atom_column(w, n);
    const std::vector<double> no_atoms(static_cast<std::size_t>(n), kLogZero);
    const std::vector<double> no_axis(static_cast<std::size_t>(env.cells() + 1), kLogZero);
    return {build_forward(TableKind::boundary_continuous, env, w.theta, boundary_row0(env, w.theta), no_atoms),
            build_forward(TableKind::boundary_atomic, env, w.theta, no_axis, atoms)};
}

ScaledTable backward_scaled(const Environment& env, const ExpIncrements& e)
{
    const int n = env.levels();
    const int m = env.cells();
    const double delta = env.grid().delta();
    ScaledTable table(n, m);

    std::vector<double> top(static_cast<std::size_t>(m + 1));
    const auto top_inc = env.level_increments(n);
    top[m] = 0.0;
    for (int i = m - 1; i >= 0; --i) top[i] = top[i + 1] + top_inc[i];
    log_row_to_scaled(top, table.mant_row(n), table.scale_row(n));

    // Either stay on level k through cell i, or jump at t_i and collect B_{k+1} over cell i.
    for (int k = n - 1; k >= 1; --k) {
        backward_row(table.mant_row(k + 1), table.scale_row(k + 1), e.level(k), e.level(k + 1), delta,
                     table.mant_row(k), table.scale_row(k));
    }
    return table;
}

LogPartitionTable backward(const Environment& env)
{
    const auto scaled = backward_scaled(env, ExpIncrements(env));
    LogPartitionTable table(TableKind::backward, env.grid(), env.levels());
    to_log(scaled, table);
    return table;
}

double RestrictedMasses::log_total() const
{
    return log_add(log_positive, log_negative);
}

namespace {

template <class Back>
RestrictedMasses restricted_masses_impl(const Environment& env, const BoundaryWeights& w, const Back& back)
{
    const int n = env.levels();
    const int m = env.cells();
    const double log_delta = std::log(env.grid().delta());
    const auto row0 = boundary_row0(env, w.theta);
    const auto atoms = atom_column(w, n);
    const auto inc1 = env.level_increments(1);

    LogSumAccumulator positive;
    for (int i = 0; i < m; ++i) positive.add(row0[i] + log_delta + inc1[i] + back(1, i + 1));
    LogSumAccumulator negative;
    for (int j = 1; j <= n; ++j) negative.add(atoms[j - 1] + back(j, 0));
    return {positive.value(), negative.value()};
}

} // namespace

RestrictedMasses restricted_boundary_masses(const Environment& env, const BoundaryWeights& w,
                                            const LogPartitionTable& back)
{
    if (back.kind() != TableKind::backward || back.levels() != env.levels() || back.grid() != env.grid()) {
        throw std::invalid_argument("restricted_boundary_masses: backward table does not match the environment");
    }
    return restricted_masses_impl(env, w, back);
}

RestrictedMasses restricted_boundary_masses(const Environment& env, const BoundaryWeights& w,
                                            const ScaledTable& back)
{
    if (back.levels != env.levels() || back.m != env.cells()) {
        throw std::invalid_argument("restricted_boundary_masses: backward table does not match the environment");
    }
    return restricted_masses_impl(env, w, [&back](int k, int i) { return back.log_at(k, i); });
}

double log_partition_free(const Environment& env, const ExpIncrements& e)
{
    const std::vector<double> row0(static_cast<std::size_t>(env.cells() + 1), kLogZero);
    return sweep_forward_endpoint(e, env.grid().delta(), row0, free_column(env.levels()));
}

double log_partition_boundary(const Environment& env, const ExpIncrements& e, const BoundaryWeights& w)
{
    return sweep_forward_endpoint(e, env.grid().delta(), boundary_row0(env, w.theta),
                                  atom_column(w, env.levels()));
}

double log_partition_free(const Environment& env)
{
    return log_partition_free(env, ExpIncrements(env));
}

double log_partition_boundary(const Environment& env, const BoundaryWeights& w)
{
    return log_partition_boundary(env, ExpIncrements(env), w);
}

IncrementSeries increments(const LogPartitionTable& fb, const Environment& env)
{
    if (fb.kind() != TableKind::forward_boundary || !fb.theta()) {
        throw std::invalid_argument("increments: expects a forward_boundary table");
    }
    if (fb.grid() != env.grid() || fb.levels() != env.levels()) {
        throw std::invalid_argument("increments: table does not match the environment");
    }
    IncrementSeries s;
    s.n = fb.levels();
    s.m = fb.cells();
    s.theta = *fb.theta();
    s.delta = env.grid().delta();
    const auto width = static_cast<std::size_t>(s.m + 1);
    s.r.resize(static_cast<std::size_t>(s.n) * width);
    s.x.resize(static_cast<std::size_t>(s.n) * width);
    s.y.resize(static_cast<std::size_t>(s.n + 1) * width);
    s.y_n.resize(static_cast<std::size_t>(s.m));

    const auto b0 = env.boundary_path();
    std::copy(b0.begin(), b0.end(), s.y.begin());
    for (int k = 1; k <= s.n; ++k) {
        const auto bk = env.level_path(k);
        const std::size_t off = static_cast<std::size_t>(k - 1) * width;
        const std::size_t yoff = static_cast<std::size_t>(k) * width;
        const std::size_t yprev = static_cast<std::size_t>(k - 1) * width;
        for (std::size_t i = 0; i < width; ++i) {
            s.r[off + i] = fb(k, static_cast<int>(i)) - fb(k - 1, static_cast<int>(i));
        }
        const double r_start = s.r[off];
        for (std::size_t i = 0; i < width; ++i) {
            s.x[off + i] = bk[i] + r_start - s.r[off + i];
            s.y[yoff + i] = s.y[yprev + i] + r_start - s.r[off + i];
        }
    }
    for (int i = 0; i < s.m; ++i) s.y_n[i] = s.theta * s.delta - (fb(s.n, i + 1) - fb(s.n, i));
    return s;
}

} // namespace brownpoly
