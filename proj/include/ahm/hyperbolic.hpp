#ifndef AHM_HYPERBOLIC_HPP
#define AHM_HYPERBOLIC_HPP

#include <span>

#include "ahm/smallvec.hpp"

namespace ahm {

// Closed forms for the exact hyperbolic half-space model
// {(x,y) : x > 0, y in R^n}, g = (dx^2 + |dy|^2)/x^2.

// Geodesic distance, cosh r = (x^2 + x'^2 + |y-y'|^2) / (2 x x').
double exact_distance(double x, std::span<const double> y, double xp,
                      std::span<const double> yp);

// Regular part of the lifted distance in polar blow-up coordinates,
//   F = log (1/2) (1 + [((rho_R+rho_L)^2+|Y|^2)((rho_R-rho_L)^2+|Y|^2)]^(1/2)),
// independent of the front-face defining function.
double exact_F(double rho_l, double rho_r, double y_norm);

// Corner sojourn value between distinct boundary points, 2 log|y - y'|.
double exact_sojourn(std::span<const double> y, std::span<const double> yp);

// Unit-speed geodesic through z' with initial unit covector zeta' = (xi', eta'),
// evaluated at arclength t.  Returns position and covector.
struct GeodesicPoint {
    double x;
    Vec y;
    double xi;
    Vec eta;
};
GeodesicPoint exact_geodesic(double xp, std::span<const double> yp, double xip,
                             std::span<const double> etap, double t);

// Launch data of the geodesic from z' to z: distance r and the unit covector
// at z' whose flow reaches z at arclength r.  Used as the shooting seed.
struct LaunchData {
    double r;
    double xi;
    Vec eta;
};
LaunchData exact_launch(double xp, std::span<const double> yp, double x,
                        std::span<const double> y);

}  // namespace ahm

#endif
