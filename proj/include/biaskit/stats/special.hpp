#pragma once

namespace biaskit::stats {

// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
double incomplete_beta(double a, double b, double x);

// Regularized upper incomplete gamma Q(a, x): series below a + 1,
// continued fraction above.
double gamma_q(double a, double x);

// Survival function of chi-squared with one degree of freedom.
double chi2_1_sf(double stat);

double chi2_sf(double stat, double dof);

// P(|T| >= |t|) for Student's t with the given degrees of freedom.
double student_t_two_sided_p(double t, double dof);

}  // namespace biaskit::stats
