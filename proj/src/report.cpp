#include "exitlaw/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "exitlaw/errors.hpp"

namespace exitlaw {

namespace {

constexpr double kPlotFloor = 1e-6;

std::string number(double x) { return fmt::format("{:.17g}", x); }

const EmpiricalDistribution& support_of(const Report& r) {
  if (r.exact_exit) return *r.exact_exit;
  if (r.empirical_exit) return *r.empirical_exit;
  throw DomainError("report has no exit law");
}

void require_compatible(const EmpiricalDistribution& base, const std::optional<EmpiricalDistribution>& d,
                        const char* what) {
  if (!d) return;
  if (d->empty()) throw DomainError(fmt::format("refusing to write: {} has empty support", what));
  if (!d->same_support(base)) throw DomainError(fmt::format("refusing to write: {} has a different support", what));
  double sum = 0.0;
  for (double m : d->mass()) {
    if (!(m >= 0.0)) throw DomainError(fmt::format("refusing to write: {} has a negative mass", what));
    sum += m;
  }
  if (std::abs(sum - 1.0) > kMassTolerance) throw DomainError(fmt::format("refusing to write: {} does not sum to 1", what));
}

void validate(const Report& r) {
  const EmpiricalDistribution& base = support_of(r);
  if (base.empty()) throw DomainError("refusing to write: exit law has empty support");
  require_compatible(base, r.exact_exit, "exact exit law");
  require_compatible(base, r.empirical_exit, "empirical exit law");
  require_compatible(base, r.resurrected_invariant, "resurrected invariant estimate");
  require_compatible(base, r.reweighted_prediction, "reweighted prediction");
  require_compatible(base, r.exact_invariant, "exact invariant");
  require_compatible(base, r.thinning_exit, "thinning exit law");
}

std::string cell(const std::optional<EmpiricalDistribution>& d, std::size_t i) {
  return d ? number((*d)[i]) : std::string();
}

}  // namespace

std::string format_table(const Report& r) {
  validate(r);
  const EmpiricalDistribution& base = support_of(r);
  std::string out = "label_or_bin_left,bin_right,exact,empirical_exit,reweighted_resurrected\n";
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base.binned()) {
      out += number(base.edges()[i]) + "," + number(base.edges()[i + 1]);
    } else {
      out += fmt::format("{},", base.labels()[i]);
    }
    out += "," + cell(r.exact_exit, i) + "," + cell(r.empirical_exit, i) + "," +
           cell(r.reweighted_prediction, i) + "\n";
  }
  return out;
}

std::string format_summary(const Report& r) {
  std::string out = fmt::format("scenario: {}\nseed: {}\n\n", r.scenario, r.seed);
  out += "statistics:\n";
  for (const auto& [k, v] : r.values) out += fmt::format("  {} = {:.10g}\n", k, v);
  out += "\nchecks:\n";
  for (const auto& c : r.checks) out += fmt::format("  {} {}: {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
  if (!r.warnings.empty()) {
    out += "\nwarnings:\n";
    for (const auto& w : r.warnings) out += "  " + w + "\n";
  }
  out += "\ntimings (s):\n";
  for (const auto& [k, v] : r.timings) out += fmt::format("  {} {:.3f}\n", k, v);
  out += fmt::format("\noverall: {}\n", r.passed() ? "PASS" : "FAIL");
  return out;
}

std::string format_figure(const Report& r) {
  validate(r);
  const EmpiricalDistribution& base = support_of(r);
  std::size_t n = base.size();
  if (base.binned() && std::isinf(base.edges().back()) && n > 1) --n;  // tail bin is not drawn

  const auto peak_at = [&](std::size_t i) {
    double m = 0.0;
    for (const auto* d : {&r.exact_exit, &r.empirical_exit, &r.reweighted_prediction})
      if (*d) m = std::max(m, (**d)[i]);
    return m;
  };
  std::size_t lo = 0;
  std::size_t hi = n;
  while (lo + 1 < hi && peak_at(lo) < kPlotFloor) ++lo;
  while (hi > lo + 1 && peak_at(hi - 1) < kPlotFloor) --hi;
  double ymax = 0.0;
  for (std::size_t i = lo; i < hi; ++i) ymax = std::max(ymax, peak_at(i));
  if (!(ymax > 0.0)) ymax = 1.0;

  const double width = 720.0, height = 420.0, left = 60.0, right = 20.0, top = 40.0, bottom = 50.0;
  const double pw = width - left - right, ph = height - top - bottom;
  const double slot = pw / static_cast<double>(hi - lo);
  const auto ypix = [&](double m) { return top + ph * (1.0 - m / (1.1 * ymax)); };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">{}: exit law</text>\n",
      width, height, width, height, left, r.scenario);
  svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", left, top + ph,
                     left + pw);
  svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", left, top, top + ph);
  svg += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{:.3g}</text>\n",
                     left - 4, ypix(ymax) + 4, ymax);

  if (r.empirical_exit) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double y = ypix((*r.empirical_exit)[i]);
      svg += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"#9ecae1\"/>\n",
                         left + slot * static_cast<double>(i - lo), y, slot, top + ph - y);
    }
  }
  const auto polyline = [&](const EmpiricalDistribution& d, const char* colour, const char* dash) {
    std::string pts;
    for (std::size_t i = lo; i < hi; ++i)
      pts += fmt::format("{:.2f},{:.2f} ", left + slot * (static_cast<double>(i - lo) + 0.5), ypix(d[i]));
    return fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{}/>\n", pts, colour,
                       dash);
  };
  if (r.exact_exit) svg += polyline(*r.exact_exit, "#d62728", "");
  if (r.reweighted_prediction) svg += polyline(*r.reweighted_prediction, "#2ca02c", " stroke-dasharray=\"5,4\"");

  const auto axis_label = [&](std::size_t i) {
    return base.binned() ? fmt::format("{:.3g}", base.edges()[i]) : fmt::format("{}", base.labels()[i]);
  };
  svg += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n", left,
                     top + ph + 16, axis_label(lo));
  svg += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
                     left + pw, top + ph + 16, axis_label(hi - 1));
  svg += fmt::format(
      "<text x=\"{0}\" y=\"{1}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#3182bd\">bars: empirical exit</text>\n"
      "<text x=\"{0}\" y=\"{2}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#d62728\">solid: exact exit</text>\n"
      "<text x=\"{0}\" y=\"{3}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#2ca02c\">dashed: kappa-reweighted resurrected</text>\n",
      left + pw - 230, top + 12, top + 26, top + 40);
  svg += "</svg>\n";
  return svg;
}

std::vector<std::filesystem::path> emit_outputs(const Report& r, const std::filesystem::path& dir) {
  // Render everything first so an invalid report writes nothing.
  const std::string table = format_table(r);
  const std::string summary = format_summary(r);
  const std::string figure = format_figure(r);

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  const std::vector<std::pair<std::filesystem::path, const std::string*>> files = {
      {dir / (r.scenario + "_table.csv"), &table},
      {dir / (r.scenario + "_summary.txt"), &summary},
      {dir / (r.scenario + "_exit.svg"), &figure},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [path, text] : files) {
    std::ofstream out(path, std::ios::binary);
    out << *text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace exitlaw
