// Bath correlation function: quadrature reference and sum-over-poles expansion.

#include "sfdeom/bath.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

namespace sfdeom {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// [N-1/N] Pade spectrum decomposition of the Bose function,
//   1/(1-e^{-x}) ~= 1/x + 1/2 + sum_j 2*eta_j*x/(x^2 + xi_j^2),
// entries (xi_j, eta_j). Computed at 150-digit precision from the Bernoulli
// Taylor series of the remainder and checked against the exact Bose function.
struct PsdTerm {
    double xi;
    double eta;
};

const std::vector<std::vector<PsdTerm>>& pade_table() {
    static const std::vector<std::vector<PsdTerm>> table = {
        // N=1
        {{7.7459666924148337704, 2.5}},
        // N=2
        {{6.3059391442248084746, 1.0328241810241552153},
         {19.499618752922665543, 5.9671758189758447847}},
        // N=3
        {{6.283290335721270011, 1.0002269883687289987},
         {12.958286695663791138, 1.3009143144667528484},
         {36.119289423658578879, 11.198858697164518153}},
        // N=4
        {{6.2831854522951095128, 1.0000004137549788792},
         {12.579950384328433253, 1.0153135880780621226},
         {20.56259756752951983, 1.9056052237633208628},
         {57.787940006334635555, 18.079080774403638135}},
        // N=5
        {{6.2831853072603947735, 1.0000000002844473229},
         {12.566542327051464935, 1.0002622513268218235},
         {19.004689562510683827, 1.1130334066054939596},
         {29.579276237187069796, 2.8001466199162054781},
         {84.536925590263979421, 26.586557721867031416}},
        // N=6
        {{6.283185307179608155, 1.0000000000000905809},
         {12.566371539174806291, 1.0000017563368017858},
         {18.856240026795349491, 1.0068000994940356772},
         {25.827832329530282385, 1.3606076230447536476},
         {40.212939288567151274, 3.9155246083697781389},
         {116.37393476083303501, 36.71706591275454017}},
        // N=7
        {{6.2831853071795864801, 1.0000000000000000152},
         {12.566370616881104157, 1.0000000056837424974},
         {18.849684120568441444, 1.000166783806547434},
         {25.199005289035053103, 1.0480013606459442845},
         {33.348987034515003367, 1.761014130868855787},
         {52.524121579448267967, 5.2213587002267505828},
         {153.30156283936537263, 48.469459018768159399}},
        // N=8
        {{6.2831853071795864769, 1.0},
         {12.566370614363063561, 1.000000000010110274},
         {18.849557182605644599, 1.0000019700581570185},
         {25.135853299994358329, 1.0029931128037991857},
         {31.728955617467152478, 1.1676625455432537001},
         {41.767557062595736742, 2.276634739389544434},
         {66.528078715502782597, 6.7093686420282937388},
         {195.3208905359343071, 61.843338990166841649}},
        // N=9
        {{6.2831853071795864769, 1.0},
         {12.566370614359176621, 1.0000000000000107733},
         {18.849555928691366122, 1.0000000129459946793},
         {25.132816341681105154, 1.00008884001850447},
         {31.444835621471248407, 1.0210926059578152607},
         {38.643466548936155446, 1.3869164500766676437},
         {51.171274006828728146, 2.8757432653529055597},
         {82.228723885456091117, 8.377617889976198321},
         {242.43243633332578224, 76.838540935671903292}},
        // N=10
        {{6.2831853071795864769, 1.0},
         {12.566370614359172956, 1.0000000000000000073},
         {18.849555921564051415, 1.0000000000518359422},
         {25.132742274872082775, 1.0000014502022113573},
         {31.417340045105263844, 1.0013123398634320571},
         {37.843903645172450881, 1.0810517048623943722},
         {46.120373629154176301, 1.6924137462192039143},
         {61.588450799175995829, 3.5445278936921945848},
         {99.627096253870225434, 10.225705744669550297},
         {294.63647546961120188, 93.454987120439177468}},
        // N=11
        {{6.2831853071795864769, 1.0},
         {12.566370614359172954, 1.0},
         {18.849555921538818418, 1.0000000000001346989},
         {25.132741237873728226, 1.0000000144564698371},
         {31.415966026543317558, 1.0000438183303644086},
         {37.711787863357133907, 1.0093409001463187398},
         {44.458179281718783311, 1.2071202682052910568},
         {54.26704348938573522, 2.0585628634078839827},
         {73.026393495205093536, 4.2786975584799740794},
         {118.72344634575591168, 12.253597451184087304},
         {351.93316557682206198, 111.69263712578947589}},
        // N=12
        {{6.2831853071795864769, 1.0},
         {12.566370614359172954, 1.0},
         {18.849555921538759526, 1.0000000000000002381},
         {25.132741228771735656, 1.0000000000942276316},
         {31.415927227055674689, 1.0000008826384589726},
         {37.699745217246585983, 1.0005739291396972573},
         {44.04937061501954726, 1.0392267542865162243},
         {51.433015098887416298, 1.4024213549231519738},
         {63.129708831029098464, 2.4677867450611171099},
         {85.486369040696455319, 5.0771832502996343953},
         {139.51779740312398885, 14.461338816840760686},
         {414.32260242964309021, 131.55146826671643551}},
    };
    return table;
}

// complex exponential integral E1(z); series for small |z|, modified Lentz
// continued fraction otherwise. Not valid on the negative real axis.
cplx expint_e1(cplx z) {
    constexpr double euler = 0.5772156649015328606;
    if (std::abs(z) <= 4.0) {
        // E1(z) = -gamma - ln z + sum_{k>=1} (-1)^{k+1} z^k / (k k!)
        cplx sum = 0.0;
        cplx term = 1.0;
        for (int k = 1; k <= 60; ++k) {
            term *= -z / static_cast<double>(k);
            cplx add = -term / static_cast<double>(k);
            sum += add;
            if (std::abs(add) < 1e-18 * (1.0 + std::abs(sum))) break;
        }
        return -euler - std::log(z) + sum;
    }
    // E1(z) = e^{-z} / (z + 1 - 1/(z + 3 - 4/(z + 5 - 9/...)))
    const double tiny = 1e-300;
    cplx b = z + 1.0;
    cplx c = 1.0 / tiny;
    cplx d = 1.0 / b;
    cplx h = d;
    for (int i = 1; i <= 300; ++i) {
        cplx a = -static_cast<double>(i) * static_cast<double>(i);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        cplx delta = c * d;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-z);
}

double denom_poly(const BrownianOscillatorBath& b, double w) {
    double u = b.omega_B * b.omega_B - w * w;
    return u * u + b.zeta * b.zeta * w * w;
}

cplx denom_poly_deriv(const BrownianOscillatorBath& b, cplx w) {
    return -4.0 * w * (b.omega_B * b.omega_B - w * w) + 2.0 * b.zeta * b.zeta * w;
}

// the four simple poles of J_B in the complex plane
std::array<cplx, 4> spectral_poles(const BrownianOscillatorBath& b) {
    cplx om = std::sqrt(cplx(b.omega_B * b.omega_B - 0.25 * b.zeta * b.zeta, 0.0));
    cplx half(0.0, 0.5 * b.zeta);
    // lower half-plane first
    return {-om - half, om - half, -om + half, om + half};
}

void check_nondegenerate(const BrownianOscillatorBath& b) {
    if (std::abs(b.omega_B - 0.5 * b.zeta) < 1e-9 * b.omega_B) {
        throw std::invalid_argument(
            "bath: critically damped (omega_B = zeta/2) gives a double pole the "
            "expansion cannot represent; perturb zeta by ~1e-6");
    }
}

struct QuadParams {
    const BrownianOscillatorBath* bath;
    double t;
    bool imag_part;
};

double quad_integrand(double w, void* p) {
    const auto& q = *static_cast<QuadParams*>(p);
    const auto& b = *q.bath;
    if (q.imag_part) {
        if (w == 0.0) return 0.0;
        return -eval_spectral_density(b, w) * std::sin(w * q.t);
    }
    double jc;
    if (std::abs(w) < 1e-8 * b.omega_B) {
        // J(w)*coth(beta w/2) -> 2 J'(0)/beta = 2 zeta/(beta omega_B^3)
        jc = 2.0 * b.zeta / (b.beta * b.omega_B * b.omega_B * b.omega_B);
    } else {
        jc = eval_spectral_density(b, w) / std::tanh(0.5 * b.beta * w);
    }
    return jc * std::cos(w * q.t);
}

double adaptive_integral(QuadParams& params, double lo, double hi) {
    static const int max_intervals = 20000;
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(max_intervals);
    gsl_function f;
    f.function = &quad_integrand;
    f.params = &params;
    double result = 0.0, abserr = 0.0;
    gsl_error_handler_t* old = gsl_set_error_handler_off();
    int status = gsl_integration_qag(&f, lo, hi, 1e-11, 1e-13, max_intervals,
                                     GSL_INTEG_GAUSS31, ws, &result, &abserr);
    gsl_set_error_handler(old);
    gsl_integration_workspace_free(ws);
    if (status != 0 || abserr > 1e-9) {
        std::ostringstream msg;
        msg << "bath: correlation quadrature did not converge (t=" << params.t
            << ", gsl status " << status << ", abserr " << abserr << ")";
        throw std::runtime_error(msg.str());
    }
    return result;
}

}  // namespace

void BrownianOscillatorBath::check() const {
    if (!(zeta > 0.0) || !(omega_B > 0.0) || !(beta > 0.0)) {
        throw std::invalid_argument("bath: zeta, omega_B and beta must all be positive");
    }
}

PoleScheme pole_scheme_from_string(const std::string& s) {
    if (s == "matsubara") return PoleScheme::matsubara;
    if (s == "pade") return PoleScheme::pade;
    throw std::invalid_argument("bath.scheme: unknown scheme '" + s + "'");
}

std::string to_string(PoleScheme s) {
    return s == PoleScheme::matsubara ? "matsubara" : "pade";
}

cplx BathExpansion::correlation(double t) const {
    cplx sum = 0.0;
    for (const auto& term : terms) sum += term.eta * std::exp(-term.gamma * t);
    return sum;
}

cplx BathExpansion::correlation_conjugate(double t) const {
    cplx sum = 0.0;
    for (std::size_t k = 0; k < terms.size(); ++k) {
        sum += std::conj(terms[conj_map[k]].eta) * std::exp(-terms[k].gamma * t);
    }
    return sum;
}

void BathExpansion::check() const {
    if (conj_map.size() != terms.size()) {
        throw std::invalid_argument("bath expansion: conj_map size mismatch");
    }
    for (std::size_t k = 0; k < terms.size(); ++k) {
        double re = terms[k].gamma.real();
        if (re < 0.0 || (!oscillatory && re <= 0.0)) {
            throw std::invalid_argument("bath expansion: Re gamma must be positive");
        }
        std::size_t kb = conj_map[k];
        if (kb >= terms.size() || conj_map[kb] != k) {
            throw std::invalid_argument("bath expansion: conj_map is not an involution");
        }
        cplx diff = terms[kb].gamma - std::conj(terms[k].gamma);
        if (std::abs(diff) > 1e-12 * (1.0 + std::abs(terms[k].gamma))) {
            throw std::invalid_argument("bath expansion: gamma_{kbar} != conj(gamma_k)");
        }
    }
}

double eval_spectral_density(const BrownianOscillatorBath& bath, double omega) {
    return bath.zeta * bath.omega_B * omega / denom_poly(bath, omega);
}

cplx correlation_reference(const BrownianOscillatorBath& bath, double t) {
    bath.check();
    check_nondegenerate(bath);
    if (t < 0.0) throw std::invalid_argument("correlation_reference: t must be >= 0");

    // C(t) = (1/pi) int_0^inf J(w) [coth(beta w/2) cos(wt) - i sin(wt)] dw.
    // [0, W] by adaptive quadrature; beyond W, coth ~ 1 (error < e^{-beta W})
    // and J is replaced by its exact partial fractions, giving E1 tails.
    double scale = std::max({bath.omega_B, bath.zeta, 1.0 / bath.beta});
    double W = std::max(60.0 / bath.beta, 25.0 * scale);

    QuadParams params{&bath, t, false};
    double re = adaptive_integral(params, 0.0, W);
    params.imag_part = true;
    double im = (t == 0.0) ? 0.0 : adaptive_integral(params, 0.0, W);

    auto poles = spectral_poles(bath);
    cplx tail = 0.0;
    for (const cplx& r : poles) {
        cplx a = bath.zeta * bath.omega_B * r / denom_poly_deriv(bath, r);
        if (t == 0.0) {
            tail += -a * std::log(W - r);  // sum A_m = 0 makes this finite
        } else {
            tail += a * std::exp(cplx(0.0, -t) * r) * expint_e1(cplx(0.0, t) * (W - r));
        }
    }
    return (cplx(re, im) + tail) / kPi;
}

BathExpansion decompose_bath(const BrownianOscillatorBath& bath, PoleScheme scheme,
                             std::size_t n_poles) {
    bath.check();
    check_nondegenerate(bath);

    // Bose-pole part of the chosen scheme: rates xi_j/beta, weights eta_j
    std::vector<PsdTerm> psd;
    psd.reserve(n_poles);
    if (scheme == PoleScheme::matsubara) {
        for (std::size_t n = 1; n <= n_poles; ++n) {
            psd.push_back({2.0 * kPi * static_cast<double>(n), 1.0});
        }
    } else {
        if (n_poles > 0) {
            const auto& table = pade_table();
            if (n_poles > table.size()) {
                throw std::invalid_argument("bath.n_poles: pade scheme tabulated up to " +
                                            std::to_string(table.size()) + " poles");
            }
            psd = table[n_poles - 1];
        }
    }

    // self-consistent pole-sum form of the Bose function
    auto bose_approx = [&](cplx x) {
        cplx s = 1.0 / x + 0.5;
        for (const auto& p : psd) s += 2.0 * p.eta * x / (x * x + p.xi * p.xi);
        return s;
    };

    BathExpansion out;
    auto poles = spectral_poles(bath);
    for (int m = 0; m < 2; ++m) {  // lower half-plane resonance poles
        cplx r = poles[m];
        cplx eta = cplx(0.0, -2.0) * bath.zeta * bath.omega_B * r * bose_approx(bath.beta * r) /
                   denom_poly_deriv(bath, r);
        out.terms.push_back({eta, cplx(0.0, 1.0) * r});
    }
    bool underdamped = bath.omega_B > 0.5 * bath.zeta;
    if (underdamped) {
        out.conj_map = {1, 0};
    } else {
        out.conj_map = {0, 1};  // two real rates, each self-paired
        for (auto& term : out.terms) term.gamma = cplx(term.gamma.real(), 0.0);
    }
    for (const auto& p : psd) {
        double nu = p.xi / bath.beta;
        // J(-i nu) = -i zeta omega_B nu / D(-i nu), D(-i nu) real
        double dnu = (bath.omega_B * bath.omega_B + nu * nu) *
                         (bath.omega_B * bath.omega_B + nu * nu) -
                     bath.zeta * bath.zeta * nu * nu;
        if (std::abs(dnu) < 1e-12 * std::pow(bath.omega_B, 4)) {
            throw std::invalid_argument(
                "bath: a Bose pole coincides with a resonance rate; perturb parameters");
        }
        double eta = -2.0 * p.eta * bath.zeta * bath.omega_B * nu / (bath.beta * dnu);
        out.conj_map.push_back(out.terms.size());
        out.terms.push_back({cplx(eta, 0.0), cplx(nu, 0.0)});
    }
    out.check();
    return out;
}

double validate_expansion(const BathExpansion& expansion, const BrownianOscillatorBath& bath,
                          std::span<const double> grid) {
    if (grid.empty()) throw std::invalid_argument("validate_expansion: empty grid");
    double max_err = 0.0;
    for (double t : grid) {
        if (t < 0.0) throw std::invalid_argument("validate_expansion: grid times must be >= 0");
        cplx ref = correlation_reference(bath, t);
        max_err = std::max(max_err, std::abs(expansion.correlation(t) - ref));
        max_err = std::max(max_err, std::abs(expansion.correlation_conjugate(t) - std::conj(ref)));
    }
    return max_err;
}

BathExpansion discrete_mode_expansion(std::span<const DiscreteMode> modes, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("discrete_mode_expansion: beta must be > 0");
    BathExpansion out;
    out.oscillatory = true;
    for (const auto& m : modes) {
        if (!(m.omega > 0.0)) {
            throw std::invalid_argument("discrete_mode_expansion: mode frequencies must be > 0");
        }
        // <q(t)q(0)> = (1/2)[coth(beta w/2) cos(wt) - i sin(wt)] per mode
        double coth = 1.0 / std::tanh(0.5 * beta * m.omega);
        double c2 = 0.25 * m.coupling * m.coupling;
        std::size_t base = out.terms.size();
        out.terms.push_back({cplx(c2 * (coth + 1.0), 0.0), cplx(0.0, m.omega)});
        out.terms.push_back({cplx(c2 * (coth - 1.0), 0.0), cplx(0.0, -m.omega)});
        out.conj_map.push_back(base + 1);
        out.conj_map.push_back(base);
    }
    out.check();
    return out;
}

}  // namespace sfdeom
