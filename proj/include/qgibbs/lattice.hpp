#pragma once

#include <string>
#include <vector>

#include "qgibbs/linalg.hpp"

namespace qgibbs {

Region make_region(std::vector<Site> sites);  // sort + dedupe
Region chain_region(int n);                   // {0},...,{n-1}
Region box_region(const Site& lo, const Site& hi);
bool contains(const Region& r, const Site& s);
Region region_union(const Region& a, const Region& b);
Region region_intersection(const Region& a, const Region& b);
Region region_difference(const Region& a, const Region& b);

int l1_dist(const Site& a, const Site& b);
int dist(const Region& a, const Region& b);  // ell-1; large sentinel if either is empty

// Sites outside A at distance 1..kappa-1 from A (whole of Z^d).
Region boundary(const Region& a, int kappa);
Region closure(const Region& a, int kappa);

struct Tiling {
  int d = 1;
  int D = 1;
  int kappa = 2;
  bool relaxed = false;
  std::vector<Site> anchors;  // lower corner of each pixel
  std::vector<Region> pixels;

  int spacing() const { return D + kappa - 1; }
};

// Pixels of the coarse-graining that meet the window. Requires D > 2 kappa unless
// relaxed is set, which admits any D >= 1 (small demos and 1D chains).
Tiling build_tiling(int d, int D, int kappa, const Region& window, bool relaxed = false);
// Every pixel anchor of the infinite tiling inside the box [lo, hi] (padded by D).
std::vector<Site> tiling_anchors(int d, int D, int kappa, const Site& lo, const Site& hi);

struct TilingReport {
  int min_pixel_distance = 0;
  bool covers_window = false;
  std::vector<Site> uncovered;
};
TilingReport check_tiling(const Tiling& t, const Region& window);

bool pixels_adjacent(const Tiling& t, int i, int j);

struct GrainedSet {
  Region region;
  std::vector<int> source_pixels;
  Region inner_boundary;  // boundary of the pixel union minus boundary of region
  int repaired = 0;       // kept sites dropped again because their neighbourhood left the closure
};

struct GrainedCheck {
  bool contains_pixels = false;    // (i)
  bool boundary_inside = false;    // (ii)
  bool closures_equal = false;     // (iii)
  bool ok() const { return contains_pixels && boundary_inside && closures_equal; }
};

GrainedSet grained_set(const std::vector<int>& cluster, const Tiling& t);
GrainedCheck check_grained(const GrainedSet& g, const Tiling& t);

struct FatRectangle {
  Site anchor;             // T = anchor + [1, l_1] x ... x [1, l_d]
  std::vector<int> sides;  // in sites
  bool fat() const;
  Region sites() const;
};

// Side length (in sites) that holds k pixels per direction.
int pixel_side_to_sites(int k, int D, int kappa);
FatRectangle rectangle_from_pixels(const Site& anchor, const std::vector<int>& k, int D, int kappa);

struct SplitParams {
  int L = 0;    // half the longest side
  int a_L = 0;  // floor(sqrt(L))
  int n_L = 0;  // floor(L / (10 a_L))
  int axis = 0;
};
SplitParams split_params(const FatRectangle& T);

struct Split {
  GrainedSet C;
  GrainedSet D;
  Region overlap;
};
// Pixels of the tiling inside T; the tiling must cover T.
std::vector<int> pixels_inside(const Tiling& t, const Region& r);
Split split_fat_rectangle(const FatRectangle& T, int n, const Tiling& t);

std::string region_to_string(const Region& r);

}  // namespace qgibbs
