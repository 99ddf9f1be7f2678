#include "deconvband/fourier.hpp"

#include "deconvband/errors.hpp"
#include "deconvband/parallel.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <cmath>
#include <numbers>
#include <string>

namespace deconvband {

namespace {

constexpr std::size_t kEcfAnchorStride = 64;
constexpr std::size_t kTableBlock = 128;
constexpr std::size_t kMaxTableNodes = std::size_t{ 1 } << 24;

// Retained integrand of the inversion formula, already multiplied by the
// trapezoid weight and h/(2 pi): K(u) = Re sum_k coeff_k exp(-i s_k u).
struct Spectrum
{
  std::vector<double> s;
  std::vector<double> re;
  std::vector<double> im;

  std::size_t size() const { return s.size(); }
};

void check_bandwidth(double h)
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw DomainError("bandwidth h must be positive and finite, got " + std::to_string(h));
}

void check_coverage(const FrequencyGrid& grid, double h)
{
  if (grid.half_width() * h < 1.0 - 1e-9)
    throw DomainError("frequency grid half-width " + std::to_string(grid.half_width()) +
                      " does not cover [-1/h, 1/h] for h = " + std::to_string(h));
}

double trapezoid_weight(const FrequencyGrid& grid, std::size_t k)
{
  const bool endpoint = k == 0 || k + 1 == grid.size();
  return endpoint ? 0.5 * grid.spacing() : grid.spacing();
}

// Frequency t, quadrature weight in t and the error ECF at t.
struct QuadPoint
{
  double t;
  double weight;
  std::complex<double> phi;
};

constexpr std::size_t kEdgeSubsamples = 8;
constexpr std::size_t kMinGregoryNodes = 8;
constexpr std::array<double, 3> kGauss3Nodes{ -0.7745966692414834, 0.0, 0.7745966692414834 };
constexpr std::array<double, 3> kGauss3Weights{ 5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0 };
constexpr std::array<double, 4> kGauss4Nodes{ -0.8611363115940526, -0.3399810435848563,
                                              0.3399810435848563, 0.8611363115940526 };
constexpr std::array<double, 4> kGauss4Weights{ 0.3478548451374538, 0.6521451548625461,
                                                0.6521451548625461, 0.3478548451374538 };
constexpr std::array<double, 3> kGregory{ 3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0 };

// The ECF on t >= 0 with a cubic Hermite interpolant between nodes.
class HalfLine
{
public:
  HalfLine(const EcfEvaluation& e, double t_max)
    : e_(e)
    , centre_(e.grid.centre())
  {
    last_ = 0;
    while (centre_ + last_ + 1 < e.grid.size() && e.grid[centre_ + last_ + 1] <= t_max * (1.0 + 1e-12))
      ++last_;
  }

  std::size_t last() const { return last_; }
  double t(std::size_t j) const { return e_.grid[centre_ + j]; }
  std::complex<double> value(std::size_t j) const { return e_.values[centre_ + j]; }

  std::complex<double> at(std::size_t j, double x) const
  {
    const double width = t(j + 1) - t(j);
    const double r = (x - t(j)) / width;
    const double s = 1.0 - r;
    const double h00 = (1.0 + 2.0 * r) * s * s;
    const double h10 = r * s * s;
    const double h01 = r * r * (3.0 - 2.0 * r);
    const double h11 = r * r * (r - 1.0);
    return h00 * value(j) + h10 * width * e_.derivatives[centre_ + j] + h01 * value(j + 1) +
           h11 * width * e_.derivatives[centre_ + j + 1];
  }

  std::complex<double> at(double x) const
  {
    const double spacing = e_.grid.spacing();
    auto j = static_cast<std::size_t>(std::max(0.0, std::floor(x / spacing)));
    j = std::min(j, last_ - 1);
    return at(j, x);
  }

private:
  const EcfEvaluation& e_;
  std::size_t centre_;
  std::size_t last_ = 0;
};

struct Segment
{
  double a;
  double b;
  bool left_edge;
  bool right_edge;
};

// Maximal intervals of [0, t_J] on which |phi| >= threshold.
std::vector<Segment> retained_segments(const HalfLine& line, double threshold)
{
  const double thr2 = threshold * threshold;
  const auto excess = [&](std::size_t j, double x) { return std::norm(line.at(j, x)) - thr2; };
  std::vector<Segment> out;
  bool inside = std::norm(line.value(0)) >= thr2;
  double start = 0.0;
  bool start_edge = false;
  for (std::size_t j = 0; j < line.last(); ++j) {
    const double lo = line.t(j);
    const double step = (line.t(j + 1) - lo) / static_cast<double>(kEdgeSubsamples);
    for (std::size_t i = 0; i < kEdgeSubsamples; ++i) {
      const double x1 = i + 1 == kEdgeSubsamples ? line.t(j + 1) : lo + step * static_cast<double>(i + 1);
      const double q1 = i + 1 == kEdgeSubsamples ? std::norm(line.value(j + 1)) - thr2 : excess(j, x1);
      if ((q1 >= 0.0) == inside)
        continue;
      double left = lo + step * static_cast<double>(i);
      double right = x1;
      for (int it = 0; it < 200 && right - left > 1e-15 * std::max(1.0, right); ++it) {
        const double mid = 0.5 * (left + right);
        if ((excess(j, mid) >= 0.0) == inside)
          left = mid;
        else
          right = mid;
      }
      const double crossing = 0.5 * (left + right);
      if (inside)
        out.push_back({ start, crossing, start_edge, true });
      else {
        start = crossing;
        start_edge = true;
      }
      inside = !inside;
    }
  }
  if (inside)
    out.push_back({ start, line.t(line.last()), start_edge, false });
  return out;
}

// Weights of the cubic through x[0..3], integrated over [lo, hi].
std::array<double, 4> cubic_weights(const std::array<double, 4>& x, double lo, double hi)
{
  std::array<double, 4> w{};
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  for (std::size_t g = 0; g < 3; ++g) {
    const double z = mid + half * kGauss3Nodes[g];
    for (std::size_t i = 0; i < 4; ++i) {
      double basis = 1.0;
      for (std::size_t k = 0; k < 4; ++k) {
        if (k != i)
          basis *= (z - x[k]) / (x[i] - x[k]);
      }
      w[i] += half * kGauss3Weights[g] * basis;
    }
  }
  return w;
}

// Quadrature over the retained frequencies on the whole line. Interior nodes
// carry trapezoid weights; segment ends cut by the threshold get end
// corrections and an exact cubic on the partial panel.
std::vector<QuadPoint> retained_points(const EcfEvaluation& e, double h)
{
  std::vector<QuadPoint> half_points;
  if (e.derivatives.size() != e.values.size()) {
    for (std::size_t k = e.grid.centre(); k < e.grid.size(); ++k) {
      if (!e.mask[k])
        continue;
      const double w = k == e.grid.centre() ? 0.5 * e.grid.spacing() : trapezoid_weight(e.grid, k);
      half_points.push_back({ e.grid[k], w, e.values[k] });
    }
  } else {
    const HalfLine line(e, 1.0 / h);
    if (line.last() < 3)
      throw DomainError("frequency grid is too coarse for bandwidth h = " + std::to_string(h));
    const double spacing = e.grid.spacing();
    std::vector<double> node_weight(line.last() + 1, 0.0);
    const auto add_off_grid = [&](double x, double w) {
      if (w != 0.0)
        half_points.push_back({ x, w, line.at(x) });
    };
    const auto node_or_point = [&](const std::array<double, 4>& x,
                                   const std::array<std::size_t, 4>& index,
                                   const std::array<double, 4>& w) {
      for (std::size_t i = 0; i < 4; ++i) {
        if (index[i] == SIZE_MAX)
          add_off_grid(x[i], w[i]);
        else
          node_weight[index[i]] += w[i];
      }
    };

    for (const Segment& seg : retained_segments(line, e.threshold)) {
      if (!(seg.b > seg.a))
        continue;
      auto p = static_cast<std::size_t>(std::ceil(seg.a / spacing - 1e-9));
      auto q = static_cast<std::size_t>(std::floor(seg.b / spacing + 1e-9));
      q = std::min(q, line.last());
      while (p <= q && line.t(p) < seg.a)
        ++p;
      while (q >= p && q > 0 && line.t(q) > seg.b)
        --q;
      if (p <= q && q - p + 1 >= kMinGregoryNodes) {
        for (std::size_t j = p; j <= q; ++j)
          node_weight[j] += spacing;
        if (seg.left_edge) {
          for (std::size_t i = 0; i < 3; ++i)
            node_weight[p + i] += (kGregory[i] - 1.0) * spacing;
          if (line.t(p) - seg.a > 1e-12 * spacing) {
            const std::array<double, 4> x{ seg.a, line.t(p), line.t(p + 1), line.t(p + 2) };
            node_or_point(x, { SIZE_MAX, p, p + 1, p + 2 }, cubic_weights(x, seg.a, line.t(p)));
          }
        } else if (p == 0) {
          node_weight[0] -= 0.5 * spacing;
        }
        if (seg.right_edge) {
          for (std::size_t i = 0; i < 3; ++i)
            node_weight[q - i] += (kGregory[i] - 1.0) * spacing;
          if (seg.b - line.t(q) > 1e-12 * spacing) {
            const std::array<double, 4> x{ line.t(q - 2), line.t(q - 1), line.t(q), seg.b };
            node_or_point(x, { q - 2, q - 1, q, SIZE_MAX }, cubic_weights(x, line.t(q), seg.b));
          }
        }
      } else {
        const auto panels = static_cast<std::size_t>(std::max(1.0, std::ceil((seg.b - seg.a) / spacing)));
        const double width = (seg.b - seg.a) / static_cast<double>(panels);
        for (std::size_t panel = 0; panel < panels; ++panel) {
          const double mid = seg.a + width * (static_cast<double>(panel) + 0.5);
          for (std::size_t g = 0; g < 4; ++g)
            add_off_grid(mid + 0.5 * width * kGauss4Nodes[g], 0.5 * width * kGauss4Weights[g]);
        }
      }
    }
    for (std::size_t j = 0; j <= line.last(); ++j) {
      if (node_weight[j] != 0.0)
        half_points.push_back({ line.t(j), node_weight[j], line.value(j) });
    }
  }

  std::vector<QuadPoint> points;
  points.reserve(2 * half_points.size());
  for (const QuadPoint& point : half_points) {
    if (point.t == 0.0) {
      points.push_back({ 0.0, 2.0 * point.weight, point.phi });
    } else {
      points.push_back(point);
      points.push_back({ -point.t, point.weight, std::conj(point.phi) });
    }
  }
  return points;
}

void check_retained(const EcfEvaluation& ecf_err, double h)
{
  check_bandwidth(h);
  check_coverage(ecf_err.grid, h);
  if (ecf_err.retained() == 0)
    throw DegenerateEcfError("every frequency of the error ECF is below the threshold " +
                             std::to_string(ecf_err.threshold));
}

Spectrum make_spectrum(const EcfEvaluation& ecf_err, const FlatTopKernel& kernel, double h)
{
  check_retained(ecf_err, h);
  Spectrum spectrum;
  const double scale = h / (2.0 * std::numbers::pi);
  for (const QuadPoint& point : retained_points(ecf_err, h)) {
    const double s = point.t * h;
    const double phi_k = kernel(s);
    if (phi_k == 0.0 || std::abs(point.phi) == 0.0)
      continue;
    const std::complex<double> coeff = point.weight * scale * phi_k / point.phi;
    spectrum.s.push_back(s);
    spectrum.re.push_back(coeff.real());
    spectrum.im.push_back(coeff.imag());
  }
  if (spectrum.size() == 0)
    throw DegenerateEcfError("no retained frequency inside the kernel support");
  return spectrum;
}

} // namespace

FrequencyGrid FrequencyGrid::symmetric(double half_width, std::size_t count)
{
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw DomainError("frequency grid half-width must be positive and finite");
  if (count < 3 || count % 2 == 0)
    throw DomainError("frequency grid needs an odd node count >= 3, got " + std::to_string(count));

  FrequencyGrid grid;
  const std::size_t half = count / 2;
  grid.spacing_ = half_width / static_cast<double>(half);
  grid.nodes_.assign(count, 0.0);
  for (std::size_t k = 1; k <= half; ++k) {
    const double t = k == half ? half_width : static_cast<double>(k) * grid.spacing_;
    grid.nodes_[half + k] = t;
    grid.nodes_[half - k] = -t;
  }
  return grid;
}

FlatTopKernel::FlatTopKernel(double b, double c)
  : b_(b)
  , c_(c)
{
  if (!(b > 0.0) || !std::isfinite(b))
    throw DomainError("flat-top parameter b must be positive");
  if (!(c > 0.0 && c < 1.0))
    throw DomainError("flat-top parameter c must lie in (0, 1)");
}

double FlatTopKernel::operator()(double t) const
{
  const double a = std::abs(t);
  if (a <= c_)
    return 1.0;
  if (a >= 1.0)
    return 0.0;
  const double inner = std::exp(-b_ / ((a - c_) * (a - c_)));
  return std::exp(-b_ * inner / ((a - 1.0) * (a - 1.0)));
}

std::size_t EcfEvaluation::retained() const
{
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

EcfEvaluation ecf(std::span<const double> sample, const FrequencyGrid& grid)
{
  if (sample.empty())
    throw DomainError("ECF of an empty sample");
  for (std::size_t j = 0; j < sample.size(); ++j) {
    if (!std::isfinite(sample[j]))
      throw DomainError("non-finite sample entry at index " + std::to_string(j));
  }

  // Summing in sorted order makes the result independent of sample order.
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());

  const std::size_t centre = grid.centre();
  const std::size_t half = centre + 1;
  std::vector<double> acc_re(half, 0.0);
  std::vector<double> acc_im(half, 0.0);
  std::vector<double> acc_dre(half, 0.0);
  std::vector<double> acc_dim(half, 0.0);
  const double dt = grid.spacing();

  for (const double eta : sorted) {
    const double rot_re = std::cos(dt * eta);
    const double rot_im = std::sin(dt * eta);
    for (std::size_t start = 0; start < half; start += kEcfAnchorStride) {
      const double phase = grid[centre + start] * eta;
      double z_re = std::cos(phase);
      double z_im = std::sin(phase);
      const std::size_t stop = std::min(half, start + kEcfAnchorStride);
      for (std::size_t k = start; k < stop; ++k) {
        acc_re[k] += z_re;
        acc_im[k] += z_im;
        acc_dre[k] -= eta * z_im;
        acc_dim[k] += eta * z_re;
        const double next_re = z_re * rot_re - z_im * rot_im;
        z_im = z_re * rot_im + z_im * rot_re;
        z_re = next_re;
      }
    }
  }

  EcfEvaluation out{ grid, {}, sample.size(), 0.0, {}, {} };
  out.values.assign(grid.size(), {});
  const double inv_m = 1.0 / static_cast<double>(sample.size());
  for (std::size_t k = 0; k < half; ++k) {
    const std::complex<double> value{ acc_re[k] * inv_m, acc_im[k] * inv_m };
    out.values[centre + k] = value;
    out.values[centre - k] = std::conj(value);
  }
  out.values[centre] = { 1.0, 0.0 };
  out.derivatives.assign(grid.size(), {});
  for (std::size_t k = 0; k < half; ++k) {
    const std::complex<double> slope{ acc_dre[k] * inv_m, acc_dim[k] * inv_m };
    out.derivatives[centre + k] = slope;
    out.derivatives[centre - k] = -std::conj(slope);
  }
  out.mask.assign(grid.size(), true);
  return out;
}

std::complex<double> ecf_at(std::span<const double> sample, double t)
{
  if (sample.empty())
    throw DomainError("ECF of an empty sample");
  double re = 0.0;
  double im = 0.0;
  for (const double eta : sample) {
    re += std::cos(t * eta);
    im += std::sin(t * eta);
  }
  const double m = static_cast<double>(sample.size());
  return { re / m, im / m };
}

EcfEvaluation with_threshold(EcfEvaluation evaluation, double threshold)
{
  if (!(threshold >= 0.0) || !std::isfinite(threshold))
    throw DomainError("ECF threshold must be finite and non-negative");
  evaluation.threshold = threshold;
  for (std::size_t k = 0; k < evaluation.values.size(); ++k)
    evaluation.mask[k] = std::abs(evaluation.values[k]) >= threshold;
  return evaluation;
}

EcfEvaluation regularized_ecf(std::span<const double> sample, const FrequencyGrid& grid)
{
  auto evaluation = ecf(sample, grid);
  const double threshold = 1.0 / std::sqrt(static_cast<double>(sample.size()));
  return with_threshold(std::move(evaluation), threshold);
}

DeconvKernelTable::DeconvKernelTable(double u_min,
                                     double spacing,
                                     std::vector<double> values,
                                     std::vector<double> derivatives,
                                     double bandwidth,
                                     double max_imag_residual)
  : u_min_(u_min)
  , spacing_(spacing)
  , values_(std::move(values))
  , derivatives_(std::move(derivatives))
  , bandwidth_(bandwidth)
  , max_imag_residual_(max_imag_residual)
{
  if (values_.size() < 2 || values_.size() != derivatives_.size())
    throw DomainError("kernel table needs at least two nodes with matching derivatives");
  if (!(spacing_ > 0.0))
    throw DomainError("kernel table spacing must be positive");
}

std::vector<double> DeconvKernelTable::u_nodes() const
{
  std::vector<double> nodes(values_.size());
  for (std::size_t k = 0; k < nodes.size(); ++k)
    nodes[k] = u_min_ + spacing_ * static_cast<double>(k);
  return nodes;
}

double DeconvKernelTable::operator()(double u) const
{
  const double position = (u - u_min_) / spacing_;
  const double last = static_cast<double>(values_.size() - 1);
  if (!(position >= -1e-9 && position <= last + 1e-9))
    throw DomainError("u = " + std::to_string(u) + " lies outside the kernel table [" +
                      std::to_string(u_min_) + ", " + std::to_string(u_max()) + "]");
  const auto cell = static_cast<std::size_t>(std::clamp(std::floor(position), 0.0, last - 1.0));
  const double t = position - static_cast<double>(cell);
  const double one_minus = 1.0 - t;
  const double h00 = (1.0 + 2.0 * t) * one_minus * one_minus;
  const double h10 = t * one_minus * one_minus;
  const double h01 = t * t * (3.0 - 2.0 * t);
  const double h11 = t * t * (t - 1.0);
  return h00 * values_[cell] + h10 * spacing_ * derivatives_[cell] + h01 * values_[cell + 1] +
         h11 * spacing_ * derivatives_[cell + 1];
}

DeconvKernelTable deconv_kernel(const EcfEvaluation& ecf_err,
                                const FlatTopKernel& kernel,
                                double h,
                                double u_min,
                                double spacing,
                                std::size_t count)
{
  const Spectrum spectrum = make_spectrum(ecf_err, kernel, h);
  if (!(spacing > 0.0) || count < 2 || !std::isfinite(u_min))
    throw DomainError("kernel table needs a finite origin, positive spacing and >= 2 nodes");
  if (count > kMaxTableNodes)
    throw DomainError("kernel table of " + std::to_string(count) + " nodes exceeds the size limit");

  const std::size_t active = spectrum.size();
  std::vector<double> rot_re(active);
  std::vector<double> rot_im(active);
  for (std::size_t k = 0; k < active; ++k) {
    rot_re[k] = std::cos(spectrum.s[k] * spacing);
    rot_im[k] = -std::sin(spectrum.s[k] * spacing);
  }

  std::vector<double> values(count);
  std::vector<double> derivatives(count);
  std::vector<double> imag(count);
  const std::size_t blocks = (count + kTableBlock - 1) / kTableBlock;

  parallel_for(blocks, [&](std::size_t block) {
    const std::size_t first = block * kTableBlock;
    const std::size_t stop = std::min(count, first + kTableBlock);
    const double u_first = u_min + spacing * static_cast<double>(first);
    std::vector<double> a_re(active);
    std::vector<double> a_im(active);
    for (std::size_t k = 0; k < active; ++k) {
      const double phase = spectrum.s[k] * u_first;
      const double c = std::cos(phase);
      const double s = std::sin(phase);
      a_re[k] = spectrum.re[k] * c + spectrum.im[k] * s;
      a_im[k] = spectrum.im[k] * c - spectrum.re[k] * s;
    }
    for (std::size_t l = first; l < stop; ++l) {
      double sum_re = 0.0;
      double sum_im = 0.0;
      double sum_d = 0.0;
      for (std::size_t k = 0; k < active; ++k) {
        sum_re += a_re[k];
        sum_im += a_im[k];
        sum_d += spectrum.s[k] * a_im[k];
        const double next_re = a_re[k] * rot_re[k] - a_im[k] * rot_im[k];
        a_im[k] = a_re[k] * rot_im[k] + a_im[k] * rot_re[k];
        a_re[k] = next_re;
      }
      values[l] = sum_re;
      derivatives[l] = sum_d;
      imag[l] = std::abs(sum_im);
    }
  });

  double residual = 0.0;
  for (std::size_t l = 0; l < count; ++l) {
    if (!std::isfinite(values[l]) || !std::isfinite(derivatives[l]))
      throw DomainError("non-finite deconvolution kernel value");
    residual = std::max(residual, imag[l]);
  }
  return DeconvKernelTable(u_min, spacing, std::move(values), std::move(derivatives), h, residual);
}

DeconvKernelTable deconv_kernel(const EcfEvaluation& ecf_err,
                                const FlatTopKernel& kernel,
                                double h,
                                double u_max,
                                const QuadratureConfig& quad)
{
  if (!(u_max >= 0.0) || !std::isfinite(u_max))
    throw DomainError("kernel table range must be finite and non-negative");
  if (!(quad.interpolation_tolerance > 0.0))
    throw DomainError("interpolation tolerance must be positive");
  const Spectrum spectrum = make_spectrum(ecf_err, kernel, h);

  // |f - H| <= spacing^4 / 384 * sup|f''''| for cubic Hermite interpolation,
  // and sup|K''''| <= sum_k |coeff_k| s_k^4 for the discretized kernel.
  double fourth = 0.0;
  double at_zero = 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const double magnitude = std::hypot(spectrum.re[k], spectrum.im[k]);
    const double s2 = spectrum.s[k] * spectrum.s[k];
    fourth += magnitude * s2 * s2;
    at_zero += spectrum.re[k];
    total += magnitude;
  }
  const double reference = std::abs(at_zero) > 0.0 ? std::abs(at_zero) : total;
  const double half_range = std::max(u_max * (1.0 + quad.u_padding), 1.0);
  double spacing = half_range / 4.0;
  if (fourth > 0.0)
    spacing = std::min(spacing, std::pow(384.0 * quad.interpolation_tolerance * reference / fourth, 0.25));
  const auto intervals = static_cast<std::size_t>(std::ceil(2.0 * half_range / spacing));
  if (intervals + 1 > kMaxTableNodes)
    throw DomainError("kernel table for u_max = " + std::to_string(u_max) + " needs " +
                      std::to_string(intervals + 1) + " nodes; exceeds the size limit");
  spacing = 2.0 * half_range / static_cast<double>(intervals);
  return deconv_kernel(ecf_err, kernel, h, -half_range, spacing, intervals + 1);
}

std::vector<double> deconv_kernel_at(const EcfEvaluation& ecf_err,
                                     const FlatTopKernel& kernel,
                                     double h,
                                     std::span<const double> u,
                                     double* max_imag_residual)
{
  const Spectrum spectrum = make_spectrum(ecf_err, kernel, h);
  std::vector<double> out(u.size());
  double residual = 0.0;
  for (std::size_t l = 0; l < u.size(); ++l) {
    double sum_re = 0.0;
    double sum_im = 0.0;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
      const double phase = spectrum.s[k] * u[l];
      const double c = std::cos(phase);
      const double s = std::sin(phase);
      sum_re += spectrum.re[k] * c + spectrum.im[k] * s;
      sum_im += spectrum.im[k] * c - spectrum.re[k] * s;
    }
    out[l] = sum_re;
    residual = std::max(residual, std::abs(sum_im));
  }
  if (max_imag_residual != nullptr)
    *max_imag_residual = residual;
  return out;
}

double plancherel_l2(const EcfEvaluation& ecf_err, const FlatTopKernel& kernel, double h)
{
  check_retained(ecf_err, h);
  double sum = 0.0;
  for (const QuadPoint& point : retained_points(ecf_err, h)) {
    const double phi_k = kernel(point.t * h);
    const double modulus2 = std::norm(point.phi);
    if (phi_k == 0.0 || modulus2 == 0.0)
      continue;
    sum += point.weight * phi_k * phi_k / modulus2;
  }
  return sum * h / (2.0 * std::numbers::pi);
}

} // namespace deconvband
