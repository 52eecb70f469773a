#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "ptorus/curvature.hpp"
#include "ptorus/gle.hpp"
#include "ptorus/green.hpp"
#include "ptorus/parallel.hpp"
#include "ptorus/pvi.hpp"

namespace py = pybind11;
using namespace ptorus;

namespace {

using Index = std::array<int, 4>;

EllipticContext make_ctx(cplx tau) { return EllipticContext(Tau(tau)); }

HamiltonianState start_state(cplx tau, double r, double s, const Index& n, double h)
{
    const PVIIndex index(n);
    return state_from_family(solution_family({r, s}, index), index, Tau(tau), h);
}

py::dict class_dict(const MonodromyClass& c)
{
    py::dict d;
    if (const auto* a = std::get_if<CompletelyReducible>(&c)) {
        d["type"] = "completely_reducible";
        d["r"] = a->r;
        d["s"] = a->s;
        return d;
    }
    const auto& b = std::get<NotCompletelyReducible>(c);
    d["type"] = "not_completely_reducible";
    d["eps1"] = b.eps1;
    d["eps2"] = b.eps2;
    d["C"] = b.C ? py::cast(*b.C) : py::none();
    return d;
}

struct Pipeline {
    EllipticContext ctx;
    GLEParams params;
    MonodromyRep rep;
};

Pipeline pipeline(cplx tau, double r, double s, const Index& n, double h)
{
    const HamiltonianState st = start_state(tau, r, s, n, h);
    EllipticContext ctx = make_ctx(tau);
    GLEParams params(ctx, PVIIndex(n), st.p, st.A);
    MonodromyRep rep = monodromy(ctx, params);
    return {ctx, params, rep};
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Elliptic Painleve VI, generalized Lame monodromy and curvature-equation solutions";

    static py::exception<NumericError> numeric_error(m, "NumericError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const NumericError& e) {
            py::object exc = numeric_error;
            py::object inst = exc(e.what());
            inst.attr("kind") = std::string(to_string(e.kind()));
            PyErr_SetObject(exc.ptr(), inst.ptr());
        }
    });

    py::class_<EllipticContext>(m, "EllipticContext")
        .def(py::init([](cplx tau, double tol) { return EllipticContext(Tau(tau), tol); }), py::arg("tau"),
             py::arg("tol") = kDefaultTol)
        .def_property_readonly("tau", [](const EllipticContext& c) { return c.tau().value(); })
        .def_property_readonly("nome", &EllipticContext::nome)
        .def_property_readonly("eta1", &EllipticContext::eta1)
        .def_property_readonly("eta2", &EllipticContext::eta2)
        .def_property_readonly("e1", &EllipticContext::e1)
        .def_property_readonly("e2", &EllipticContext::e2)
        .def_property_readonly("e3", &EllipticContext::e3)
        .def_property_readonly("g2", &EllipticContext::g2)
        .def_property_readonly("g3", &EllipticContext::g3)
        .def_property_readonly("series_cutoff", &EllipticContext::series_cutoff)
        .def("half_period", &EllipticContext::half_period, py::arg("k"))
        .def("wp", [](const EllipticContext& c, cplx z) { return c.wp(z).wp; }, py::arg("z"))
        .def("dwp", [](const EllipticContext& c, cplx z) { return c.wp(z).dwp; }, py::arg("z"))
        .def("zeta", &EllipticContext::wzeta, py::arg("z"))
        .def("invert_wp", [](const EllipticContext& c, cplx v) { return c.invert_wp(v).z; }, py::arg("value"))
        .def("torus_distance", &EllipticContext::torus_distance, py::arg("a"), py::arg("b"))
        .def("identity_residuals", [](const EllipticContext& c) {
            const IdentityResiduals r = c.identity_residuals();
            py::dict d;
            d["e_sum"] = r.e_sum;
            d["legendre"] = r.legendre;
            d["g2"] = r.g2;
            d["g3"] = r.g3;
            return d;
        });

    m.def(
        "critical_points",
        [](cplx tau, std::optional<cplx> p) {
            const EllipticContext ctx = make_ctx(tau);
            std::optional<SingularPair> pair;
            if (p)
                pair.emplace(ctx, *p);
            py::list out;
            for (const CriticalPoint& cp : find_critical_points(ctx, pair)) {
                py::dict d;
                d["z"] = cp.location.z;
                d["r"] = cp.location.r;
                d["s"] = cp.location.s;
                d["trivial"] = cp.kind == CriticalKind::Trivial;
                d["residual"] = cp.residual;
                d["hessian_det"] = cp.hessian_det;
                out.append(d);
            }
            return out;
        },
        py::arg("tau"), py::arg("p") = py::none(), "Critical points of G, or of G_p when p is given.");

    m.def(
        "gp_grad",
        [](cplx tau, cplx p, cplx z) {
            const EllipticContext ctx = make_ctx(tau);
            return gp_grad(ctx, SingularPair(ctx, p), z);
        },
        py::arg("tau"), py::arg("p"), py::arg("z"));

    m.def(
        "z_rs", [](cplx tau, double r, double s) { return z_rs(make_ctx(tau), {r, s}); }, py::arg("tau"),
        py::arg("r"), py::arg("s"));
    m.def(
        "solution_p",
        [](cplx tau, double r, double s, const Index& n) {
            return solution_p(make_ctx(tau), {r, s}, PVIIndex(n)).p.z;
        },
        py::arg("tau"), py::arg("r"), py::arg("s"), py::arg("n") = Index{0, 0, 0, 0},
        "Point p on the torus from the explicit solution (Hitchin for n = 0).");

    m.def(
        "epvi_residual",
        [](cplx tau, double r, double s, const Index& n, double h) {
            const PVIIndex index(n);
            return epvi_residual(solution_family({r, s}, index), index, Tau(tau), h);
        },
        py::arg("tau"), py::arg("r"), py::arg("s"), py::arg("n") = Index{0, 0, 0, 0}, py::arg("h") = 1e-3);

    m.def(
        "hamiltonian_flow",
        [](cplx tau0, cplx tau1, double r, double s, const Index& n, int steps) {
            const auto states = hamiltonian_flow(PVIIndex(n), start_state(tau0, r, s, n, 1e-3), Tau(tau1), steps);
            py::list out;
            for (const auto& st : states) {
                py::dict d;
                d["tau"] = st.tau;
                d["p"] = st.p;
                d["A"] = st.A;
                d["B"] = st.B;
                out.append(d);
            }
            return out;
        },
        py::arg("tau0"), py::arg("tau1"), py::arg("r"), py::arg("s"), py::arg("n") = Index{0, 0, 0, 0},
        py::arg("steps") = 4);

    m.def(
        "monodromy",
        [](cplx tau, double r, double s, const Index& n, double tol) {
            const Pipeline pl = pipeline(tau, r, s, n, 1e-3);
            const MonodromyRep& rep = pl.rep;
            py::dict d;
            d["p"] = pl.params.p();
            d["A"] = pl.params.A();
            d["B"] = pl.params.B();
            d["basepoint"] = rep.basepoint;
            d["N1"] = rep.N1;
            d["N2"] = rep.N2;
            d["gamma_plus"] = rep.gamma_plus;
            d["gamma_minus"] = rep.gamma_minus;
            d["det_defect"] = rep.det_defect();
            d["commutator_norm"] = rep.commutator_norm();
            d["local_defect"] = rep.local_defect();
            d["class"] = class_dict(classify(rep, tol));
            const auto unitary = is_unitary(rep, tol);
            d["recovered"] = unitary ? py::cast(*unitary) : py::none();
            return d;
        },
        py::arg("tau"), py::arg("r"), py::arg("s"), py::arg("n") = Index{0, 0, 0, 0}, py::arg("tol") = 1e-6,
        "Monodromy of the generalized Lame equation built from the solution with exponents (r, s).");

    m.def(
        "omega_membership",
        [](cplx tau, cplx p, const Index& n, double match_tol) -> py::object {
            const EllipticContext ctx = make_ctx(tau);
            MembershipOptions opts;
            opts.match_tol = match_tol;
            const auto w = omega_membership(ctx, SingularPair(ctx, p), PVIIndex(n), opts);
            if (!w)
                return py::none();
            return py::make_tuple(w->r, w->s, w->residual);
        },
        py::arg("tau"), py::arg("p"), py::arg("n") = Index{0, 0, 0, 0}, py::arg("match_tol") = 1e-3,
        "A witness (r, s, residual) for p in Omega, or None.");

    m.def(
        "omega_scan",
        [](cplx tau, const Index& n, int resolution) {
            const RegionSample s = omega_scan(Tau(tau), PVIIndex(n), resolution);
            py::array_t<bool> member({resolution, resolution}), excluded({resolution, resolution});
            auto mm = member.mutable_unchecked<2>();
            auto ee = excluded.mutable_unchecked<2>();
            for (int j = 0; j < resolution; ++j)
                for (int i = 0; i < resolution; ++i) {
                    mm(j, i) = s.at(i, j).member;
                    ee(j, i) = s.at(i, j).excluded;
                }
            py::dict d;
            d["member"] = member;
            d["excluded"] = excluded;
            return d;
        },
        py::arg("tau"), py::arg("n") = Index{0, 0, 0, 0}, py::arg("resolution") = 64,
        "Membership over cell centers; arrays are indexed [s, r].");

    m.def(
        "synth",
        [](cplx tau, double r, double s, const Index& n, int resolution, double beta) {
            const Pipeline pl = pipeline(tau, r, s, n, 1e-3);
            const EigenBasis basis = eigenbasis(pl.ctx, pl.params, pl.rep);
            const SolutionField f = u_field(pl.ctx, pl.params, basis, resolution, beta);
            const int k = f.stride();
            py::array_t<double> u({k, k});
            auto uu = u.mutable_unchecked<2>();
            for (int j = 0; j < k; ++j)
                for (int i = 0; i < k; ++i)
                    uu(j, i) = f.is_masked(i, j) ? std::numeric_limits<double>::quiet_NaN() : f.at(i, j);
            py::dict d;
            d["u"] = u;
            d["hx"] = f.hx;
            d["hy"] = f.hy;
            d["mask_radius"] = f.mask_radius;
            d["pde_residual"] = pde_residual(f);
            d["evenness_defect"] = evenness_defect(pl.ctx, pl.params, basis, f);
            return d;
        },
        py::arg("tau"), py::arg("r"), py::arg("s"), py::arg("n") = Index{0, 0, 0, 0}, py::arg("resolution") = 64,
        py::arg("beta") = 1.0, "u on the rectangular grid [0,1] x [0, Im tau]; masked nodes are NaN.");

    m.def("set_max_threads", &set_max_threads, py::arg("n"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command line tool in-process; returns (exit code, stdout, stderr).");
}
