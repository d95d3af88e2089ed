#include "pyramid/trace.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <istream>
#include <ostream>
#include <sstream>

#include "pyramid/errors.hpp"

namespace pyramid {

Region Region::from_code(std::uint32_t code) {
  if (code == 0) return l0();
  const std::uint32_t v = code - 1;
  return table_of(static_cast<std::uint16_t>(v / 256),
                  static_cast<std::uint16_t>(v % 256));
}

Shape shape(std::span<const TraceEvent> trace) {
  Shape out;
  out.reserve(trace.size());
  for (const auto& e : trace) out.push_back({e.region, e.op});
  return out;
}

std::string shape_bytes(std::span<const ShapeEvent> s) {
  std::string out;
  out.reserve(s.size() * 5);
  for (const auto& e : s) {
    out.push_back(static_cast<char>(e.region.kind));
    out.push_back(static_cast<char>(e.region.level & 0xff));
    out.push_back(static_cast<char>(e.region.level >> 8));
    out.push_back(static_cast<char>(e.region.table));
    out.push_back(static_cast<char>(e.op));
  }
  return out;
}

const Shape& TraceRecorder::shape() const {
  if (!shape_cache_) shape_cache_ = pyramid::shape(events_);
  return *shape_cache_;
}

void export_csv(std::ostream& os, std::span<const TraceEvent> trace) {
  for (const auto& e : trace) {
    os << e.region.code() << ',' << e.index << ','
       << static_cast<unsigned>(e.op) << '\n';
  }
}

std::vector<TraceEvent> import_csv(std::istream& is) {
  std::vector<TraceEvent> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::uint64_t region = 0, index = 0, op = 0;
    char c1 = 0, c2 = 0;
    if (!(ls >> region >> c1 >> index >> c2 >> op) || c1 != ',' || c2 != ',' ||
        op > 2) {
      throw InvalidParameter("malformed trace line: " + line);
    }
    out.push_back({Region::from_code(static_cast<std::uint32_t>(region)),
                   static_cast<std::uint32_t>(index),
                   static_cast<AccessOp>(op)});
  }
  return out;
}

ChiSquareResult chi_square_uniform(std::span<const std::uint64_t> counts,
                                   double significance) {
  if (counts.size() < 2) {
    throw InvalidParameter("chi-square needs at least two cells");
  }
  if (!(significance > 0.0 && significance < 1.0)) {
    throw InvalidParameter("significance must lie in (0, 1)");
  }
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total < 5 * counts.size()) {
    throw InsufficientData("chi-square needs >= 5 events per cell");
  }
  const double expected =
      static_cast<double>(total) / static_cast<double>(counts.size());
  double stat = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  ChiSquareResult r;
  r.statistic = stat;
  r.dof = counts.size() - 1;
  r.total = total;
  boost::math::chi_squared dist(static_cast<double>(r.dof));
  r.critical = boost::math::quantile(boost::math::complement(dist, significance));
  r.pass = stat <= r.critical;
  return r;
}

std::vector<std::uint64_t> index_histogram(std::span<const TraceEvent> trace,
                                           Region region,
                                           std::uint32_t buckets) {
  std::vector<std::uint64_t> h(buckets, 0);
  for (const auto& e : trace) {
    if (e.region == region) {
      if (e.index >= buckets) {
        throw InvalidParameter("trace index outside region bounds");
      }
      ++h[e.index];
    }
  }
  return h;
}

}  // namespace pyramid
