#include "qgibbs/lattice.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace qgibbs {

Region make_region(std::vector<Site> sites) {
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  if (!sites.empty()) {
    const size_t d = sites.front().size();
    for (const auto& s : sites)
      if (s.size() != d) throw PreconditionError("region: mixed dimensions");
  }
  return sites;
}

Region chain_region(int n) {
  Region r;
  for (int i = 0; i < n; ++i) r.push_back({i});
  return r;
}

Region box_region(const Site& lo, const Site& hi) {
  Region r;
  const size_t d = lo.size();
  Site cur = lo;
  for (size_t k = 0; k < d; ++k)
    if (hi[k] < lo[k]) return r;
  while (true) {
    r.push_back(cur);
    int k = static_cast<int>(d) - 1;
    while (k >= 0) {
      if (++cur[k] <= hi[k]) break;
      cur[k] = lo[k];
      --k;
    }
    if (k < 0) break;
  }
  return r;  // already lexicographic
}

bool contains(const Region& r, const Site& s) { return std::binary_search(r.begin(), r.end(), s); }

Region region_union(const Region& a, const Region& b) {
  Region out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Region region_intersection(const Region& a, const Region& b) {
  Region out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Region region_difference(const Region& a, const Region& b) {
  Region out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

int l1_dist(const Site& a, const Site& b) {
  int s = 0;
  for (size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s;
}

int dist(const Region& a, const Region& b) {
  int best = INT_MAX;
  for (const auto& x : a)
    for (const auto& y : b) best = std::min(best, l1_dist(x, y));
  return best;
}

namespace {

// all offsets with 1 <= |v|_1 <= r
std::vector<Site> ball_offsets(int d, int r) {
  std::vector<Site> out;
  Site lo(d, -r), hi(d, r);
  for (const auto& v : box_region(lo, hi)) {
    int n = 0;
    for (int c : v) n += std::abs(c);
    if (n >= 1 && n <= r) out.push_back(v);
  }
  return out;
}

Site add(const Site& a, const Site& b) {
  Site c(a.size());
  for (size_t k = 0; k < a.size(); ++k) c[k] = a[k] + b[k];
  return c;
}

// dense grid over a box, for the bulk-site algorithms below
struct Grid {
  Site lo, hi;
  std::vector<long> stride;
  long size = 1;
  Grid(Site l, Site h) : lo(std::move(l)), hi(std::move(h)) {
    const int d = static_cast<int>(lo.size());
    stride.assign(d, 1);
    for (int k = d - 1; k >= 0; --k) {
      stride[k] = size;
      size *= (hi[k] - lo[k] + 1);
    }
  }
  bool inside(const Site& s) const {
    for (size_t k = 0; k < s.size(); ++k)
      if (s[k] < lo[k] || s[k] > hi[k]) return false;
    return true;
  }
  long index(const Site& s) const {
    long i = 0;
    for (size_t k = 0; k < s.size(); ++k) i += (s[k] - lo[k]) * stride[k];
    return i;
  }
  Site site(long i) const {
    Site s(lo.size());
    for (size_t k = 0; k < s.size(); ++k) {
      s[k] = lo[k] + static_cast<int>(i / stride[k]);
      i %= stride[k];
    }
    return s;
  }
};

struct Box {
  Site lo, hi;
};

Box pixel_box(const Site& anchor, int D) {
  Site hi = anchor;
  for (auto& c : hi) c += D - 1;
  return {anchor, hi};
}

int box_point_dist(const Box& b, const Site& x) {
  int s = 0;
  for (size_t k = 0; k < x.size(); ++k) s += std::max({0, b.lo[k] - x[k], x[k] - b.hi[k]});
  return s;
}

int box_box_dist(const Box& a, const Box& b) {
  int s = 0;
  for (size_t k = 0; k < a.lo.size(); ++k) s += std::max({0, a.lo[k] - b.hi[k], b.lo[k] - a.hi[k]});
  return s;
}

int floordiv(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

void bbox(const Region& r, Site& lo, Site& hi) {
  lo = r.front();
  hi = r.front();
  for (const auto& s : r)
    for (size_t k = 0; k < s.size(); ++k) {
      lo[k] = std::min(lo[k], s[k]);
      hi[k] = std::max(hi[k], s[k]);
    }
}

}  // namespace

Region boundary(const Region& a, int kappa) {
  if (kappa < 1) throw PreconditionError("boundary: kappa must be >= 1");
  if (a.empty() || kappa == 1) return {};
  std::vector<Site> out;
  auto offs = ball_offsets(static_cast<int>(a.front().size()), kappa - 1);
  for (const auto& x : a)
    for (const auto& v : offs) {
      Site y = add(x, v);
      if (!contains(a, y)) out.push_back(y);
    }
  return make_region(std::move(out));
}

Region closure(const Region& a, int kappa) { return region_union(a, boundary(a, kappa)); }

// ---------------------------------------------------------------------------
// tiling

std::vector<Site> tiling_anchors(int d, int D, int kappa, const Site& lo, const Site& hi) {
  const int s = D + kappa - 1;
  const int o = (D - 1 + kappa) / 2;
  std::vector<Site> out;
  // base pixels A_0 (j = 0) and A_j = A_0 + t^j
  for (int j = 0; j < d; ++j) {
    // per transverse coordinate k >= 1: positions 2 m s + (k == j ? s : 0)
    std::vector<std::vector<int>> choices(d);
    for (int k = 1; k < d; ++k) {
      int shift = (k == j) ? s : 0;
      int mlo = floordiv(lo[k] - D + 1 - shift, 2 * s) - 1;
      int mhi = floordiv(hi[k] - shift, 2 * s) + 1;
      for (int m = mlo; m <= mhi; ++m) {
        int p = 2 * m * s + shift;
        if (p + D - 1 >= lo[k] && p <= hi[k]) choices[k].push_back(p);
      }
    }
    int shift0 = (j >= 1) ? o : 0;
    int llo = floordiv(lo[0] - D + 1 - shift0, s) - 1;
    int lhi = floordiv(hi[0] - shift0, s) + 1;
    for (int l = llo; l <= lhi; ++l) {
      int p = l * s + shift0;
      if (p + D - 1 >= lo[0] && p <= hi[0]) choices[0].push_back(p);
    }
    // cartesian product
    Site cur(d, 0);
    std::vector<size_t> idx(d, 0);
    bool empty = false;
    for (int k = 0; k < d; ++k)
      if (choices[k].empty()) empty = true;
    if (empty) continue;
    while (true) {
      for (int k = 0; k < d; ++k) cur[k] = choices[k][idx[k]];
      out.push_back(cur);
      int k = d - 1;
      while (k >= 0) {
        if (++idx[k] < choices[k].size()) break;
        idx[k] = 0;
        --k;
      }
      if (k < 0) break;
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Tiling build_tiling(int d, int D, int kappa, const Region& window, bool relaxed) {
  if (d < 1 || D < 1 || kappa < 1) throw PreconditionError("build_tiling: bad parameters");
  if (!relaxed && D <= 2 * kappa) throw PreconditionError("build_tiling: requires D > 2 kappa");
  if (window.empty()) throw PreconditionError("build_tiling: empty window");
  Tiling t;
  t.d = d;
  t.D = D;
  t.kappa = kappa;
  t.relaxed = relaxed;
  Site lo, hi;
  bbox(window, lo, hi);
  for (const auto& a : tiling_anchors(d, D, kappa, lo, hi)) {
    Box b = pixel_box(a, D);
    bool meets = false;
    for (const auto& x : window)
      if (box_point_dist(b, x) == 0) {
        meets = true;
        break;
      }
    if (!meets) continue;
    t.anchors.push_back(a);
    t.pixels.push_back(box_region(b.lo, b.hi));
  }
  return t;
}

TilingReport check_tiling(const Tiling& t, const Region& window) {
  TilingReport rep;
  rep.min_pixel_distance = INT_MAX;
  const size_t n = t.anchors.size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      rep.min_pixel_distance = std::min(
          rep.min_pixel_distance, box_box_dist(pixel_box(t.anchors[i], t.D), pixel_box(t.anchors[j], t.D)));
  Site lo, hi;
  bbox(window, lo, hi);
  for (auto& c : lo) c -= t.D + t.kappa;
  for (auto& c : hi) c += t.D + t.kappa;
  auto anchors = tiling_anchors(t.d, t.D, t.kappa, lo, hi);
  for (const auto& x : window) {
    bool hit = false;
    for (const auto& a : anchors)
      if (box_point_dist(pixel_box(a, t.D), x) <= t.kappa - 1) {
        hit = true;
        break;
      }
    if (!hit) rep.uncovered.push_back(x);
  }
  rep.covers_window = rep.uncovered.empty();
  return rep;
}

bool pixels_adjacent(const Tiling& t, int i, int j) {
  if (i == j) return false;
  int dd = box_box_dist(pixel_box(t.anchors[i], t.D), pixel_box(t.anchors[j], t.D));
  // boundaries meet iff some site sits within kappa-1 of both
  return dd >= 2 && dd <= 2 * (t.kappa - 1);
}

// ---------------------------------------------------------------------------
// grained sets

namespace {

GrainedSet grained_from_anchors(const std::vector<Site>& cluster_anchors, const std::vector<int>& ids,
                                const Tiling& t) {
  const int d = t.d, D = t.D, kappa = t.kappa, s = t.spacing();
  GrainedSet g;
  g.source_pixels = ids;
  std::vector<Site> a_sites;
  for (const auto& a : cluster_anchors) {
    Box b = pixel_box(a, D);
    for (auto& x : box_region(b.lo, b.hi)) a_sites.push_back(x);
  }
  Region A = make_region(a_sites);
  if (kappa == 1) {
    g.region = A;
    return g;
  }
  Site lo, hi;
  bbox(A, lo, hi);
  const int pad = D + 2 * kappa + 1;
  for (auto& c : lo) c -= pad;
  for (auto& c : hi) c += pad;
  Grid grid(lo, hi);
  std::set<Site> cl(cluster_anchors.begin(), cluster_anchors.end());
  auto all = tiling_anchors(d, D, kappa, lo, hi);

  // per grid site: cluster pixels whose boundary holds it; foreign flag
  std::vector<std::vector<int>> in_bd(grid.size);
  std::vector<char> foreign(grid.size, 0), in_a(grid.size, 0);
  for (const auto& x : A) in_a[grid.index(x)] = 1;
  std::vector<Site> pixel_anchor;
  for (const auto& a : all) {
    bool is_cluster = cl.count(a) > 0;
    Box b = pixel_box(a, D);
    Site elo = b.lo, ehi = b.hi;
    for (auto& c : elo) c -= kappa - 1;
    for (auto& c : ehi) c += kappa - 1;
    int pid = -1;
    if (is_cluster) {
      pid = static_cast<int>(pixel_anchor.size());
      pixel_anchor.push_back(a);
    }
    for (const auto& x : box_region(elo, ehi)) {
      if (!grid.inside(x)) continue;
      int dd = box_point_dist(b, x);
      if (dd < 1 || dd > kappa - 1) continue;
      long i = grid.index(x);
      if (is_cluster)
        in_bd[i].push_back(pid);
      else
        foreign[i] = 1;
    }
  }
  auto column_of = [&](const Site& a) { return d >= 2 ? floordiv(a[1], s) : 0; };

  std::vector<char> keep(grid.size, 0);
  std::vector<long> bdA;
  for (long i = 0; i < grid.size; ++i) {
    if (in_a[i] || in_bd[i].empty()) continue;
    bdA.push_back(i);
    if (foreign[i]) continue;
    const Site x = grid.site(i);
    const int npix = static_cast<int>(in_bd[i].size());
    bool k = false;
    if (d == 1) {
      k = npix >= 2;
    } else if (d == 2) {
      int y = x[1];
      int r = y - floordiv(y, s) * s;
      if (r <= D - 1) {
        // inside a column strip: centre rows only
        k = npix >= 2 && r >= kappa - 1 && r <= D - kappa;
      } else {
        int below = floordiv(y, s), above = below + 1;
        int nb = 0, na = 0;
        for (int p : in_bd[i]) {
          int c = column_of(pixel_anchor[p]);
          if (c == below) ++nb;
          if (c == above) ++na;
        }
        k = nb >= 1 && na >= 1;
      }
    } else {
      k = npix >= 2;
    }
    keep[i] = k ? 1 : 0;
  }

  // drop kept sites whose neighbourhood leaves the pixel closure
  std::vector<char> in_s(grid.size, 0);
  for (long i = 0; i < grid.size; ++i) in_s[i] = in_a[i] || keep[i];
  auto offs = ball_offsets(d, kappa - 1);
  bool changed = true;
  while (changed) {
    changed = false;
    for (long i : bdA) {
      if (!keep[i]) continue;
      Site x = grid.site(i);
      for (const auto& v : offs) {
        Site y = add(x, v);
        long j = grid.index(y);
        if (!in_s[j] && in_bd[j].empty()) {
          keep[i] = 0;
          in_s[i] = 0;
          ++g.repaired;
          changed = true;
          break;
        }
      }
    }
  }

  // fill holes: complement cells not reachable from the grid border
  std::vector<char> outside(grid.size, 0);
  std::deque<long> q;
  for (long i = 0; i < grid.size; ++i) {
    if (in_s[i]) continue;
    Site x = grid.site(i);
    bool border = false;
    for (int k = 0; k < d; ++k)
      if (x[k] == lo[k] || x[k] == hi[k]) border = true;
    if (border) {
      outside[i] = 1;
      q.push_back(i);
    }
  }
  while (!q.empty()) {
    long i = q.front();
    q.pop_front();
    Site x = grid.site(i);
    for (int k = 0; k < d; ++k)
      for (int sgn : {-1, 1}) {
        Site y = x;
        y[k] += sgn;
        if (!grid.inside(y)) continue;
        long j = grid.index(y);
        if (in_s[j] || outside[j]) continue;
        outside[j] = 1;
        q.push_back(j);
      }
  }
  std::vector<Site> out;
  for (long i = 0; i < grid.size; ++i)
    if (!outside[i]) out.push_back(grid.site(i));
  g.region = make_region(std::move(out));

  Region bd_s = boundary(g.region, kappa);
  std::vector<Site> inner;
  for (long i : bdA) {
    Site x = grid.site(i);
    if (!contains(bd_s, x)) inner.push_back(x);
  }
  g.inner_boundary = make_region(std::move(inner));
  return g;
}

}  // namespace

GrainedSet grained_set(const std::vector<int>& cluster, const Tiling& t) {
  if (cluster.empty()) throw PreconditionError("grained_set: empty cluster");
  for (int i : cluster)
    if (i < 0 || i >= static_cast<int>(t.anchors.size()))
      throw PreconditionError("grained_set: pixel index out of range");
  // connectivity through adjacent pixels
  std::vector<int> seen(cluster.size(), 0);
  std::deque<size_t> q{0};
  seen[0] = 1;
  while (!q.empty()) {
    size_t a = q.front();
    q.pop_front();
    for (size_t b = 0; b < cluster.size(); ++b)
      if (!seen[b] && pixels_adjacent(t, cluster[a], cluster[b])) {
        seen[b] = 1;
        q.push_back(b);
      }
  }
  for (int v : seen)
    if (!v) throw PreconditionError("grained_set: cluster is not connected");
  std::vector<Site> anchors;
  for (int i : cluster) anchors.push_back(t.anchors[i]);
  std::vector<int> ids = cluster;
  std::sort(ids.begin(), ids.end());
  return grained_from_anchors(anchors, ids, t);
}

GrainedCheck check_grained(const GrainedSet& g, const Tiling& t) {
  GrainedCheck c;
  std::vector<Site> a_sites;
  for (int i : g.source_pixels)
    for (const auto& x : t.pixels[i]) a_sites.push_back(x);
  Region A = make_region(a_sites);
  c.contains_pixels = region_difference(A, g.region).empty();
  Region bdA = boundary(A, t.kappa);
  Region bdS = boundary(g.region, t.kappa);
  c.boundary_inside = region_difference(bdS, bdA).empty();
  c.closures_equal = region_union(A, bdA) == region_union(g.region, bdS);
  return c;
}

// ---------------------------------------------------------------------------
// fat rectangles

bool FatRectangle::fat() const {
  int mn = *std::min_element(sides.begin(), sides.end());
  int mx = *std::max_element(sides.begin(), sides.end());
  return 10 * mn >= mx;
}

Region FatRectangle::sites() const {
  Site lo = anchor, hi = anchor;
  for (size_t k = 0; k < sides.size(); ++k) {
    lo[k] += 1;
    hi[k] += sides[k];
  }
  return box_region(lo, hi);
}

int pixel_side_to_sites(int k, int D, int kappa) { return (2 * D - 1) * k + 2 * (kappa - 1) * (k - 1); }

FatRectangle rectangle_from_pixels(const Site& anchor, const std::vector<int>& k, int D, int kappa) {
  FatRectangle T;
  T.anchor = anchor;
  for (int kj : k) T.sides.push_back(pixel_side_to_sites(kj, D, kappa));
  return T;
}

SplitParams split_params(const FatRectangle& T) {
  SplitParams p;
  auto it = std::max_element(T.sides.begin(), T.sides.end());
  p.axis = static_cast<int>(it - T.sides.begin());
  p.L = *it / 2;
  p.a_L = static_cast<int>(std::floor(std::sqrt(static_cast<double>(p.L))));
  p.n_L = p.a_L > 0 ? p.L / (10 * p.a_L) : 0;
  return p;
}

std::vector<int> pixels_inside(const Tiling& t, const Region& r) {
  std::vector<int> out;
  for (size_t i = 0; i < t.pixels.size(); ++i) {
    bool in = true;
    for (const auto& x : t.pixels[i])
      if (!contains(r, x)) {
        in = false;
        break;
      }
    if (in) out.push_back(static_cast<int>(i));
  }
  return out;
}

Split split_fat_rectangle(const FatRectangle& T, int n, const Tiling& t) {
  SplitParams p = split_params(T);
  if (p.n_L < 1) throw PreconditionError("split_fat_rectangle: rectangle too small (n_L < 1)");
  if (n < 1 || n > p.n_L) throw PreconditionError("split_fat_rectangle: n out of range");
  Region sites = T.sites();
  std::vector<int> inside = pixels_inside(t, sites);
  if (inside.empty()) throw PreconditionError("split_fat_rectangle: tiling has no pixel inside T");
  const int ax = p.axis;
  const double half = T.sides[ax] / 2.0;
  const double c_top = half + n * p.a_L;
  const double d_bot = half + (n - 1) * p.a_L;
  std::vector<int> cpix, dpix;
  for (int i : inside) {
    int r_lo = t.anchors[i][ax] - T.anchor[ax];
    int r_hi = r_lo + t.D - 1;
    if (r_hi <= c_top) cpix.push_back(i);
    if (r_lo > d_bot) dpix.push_back(i);
  }
  if (cpix.empty() || dpix.empty()) throw PreconditionError("split_fat_rectangle: empty half");
  Split out;
  out.C = grained_set(cpix, t);
  out.D = grained_set(dpix, t);
  out.overlap = region_intersection(out.C.region, out.D.region);
  return out;
}

std::string region_to_string(const Region& r) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < r.size(); ++i) {
    if (i) os << ",";
    os << "(";
    for (size_t k = 0; k < r[i].size(); ++k) os << (k ? "," : "") << r[i][k];
    os << ")";
  }
  os << "]";
  return os.str();
}

}  // namespace qgibbs
