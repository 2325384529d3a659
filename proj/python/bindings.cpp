#include "fraclap/driver.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/io.hpp"
#include "fraclap/mesh.hpp"
#include "fraclap/rational.hpp"

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace fraclap;

namespace {

py::array_t<double> to_array(const std::vector<double>& values)
{
    py::array_t<double> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(values.size())});
    auto a = out.mutable_unchecked<1>();
    for (std::size_t i = 0; i < values.size(); ++i)
        a(static_cast<py::ssize_t>(i)) = values[i];
    return out;
}

py::array_t<double> vertex_array(const Mesh& mesh)
{
    py::array_t<double> out({static_cast<py::ssize_t>(mesh.num_vertices()), py::ssize_t{2}});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
        v(i, 0) = mesh.vertex(static_cast<int>(i)).x;
        v(i, 1) = mesh.vertex(static_cast<int>(i)).y;
    }
    return out;
}

py::array_t<int> cell_array(const Mesh& mesh)
{
    py::array_t<int> out({static_cast<py::ssize_t>(mesh.num_cells()), py::ssize_t{3}});
    auto c = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < mesh.num_cells(); ++i)
        for (int k = 0; k < 3; ++k)
            c(i, k) = mesh.cell(static_cast<int>(i))[k];
    return out;
}

Mesh mesh_from_arrays(py::array_t<double, py::array::c_style | py::array::forcecast> vertices,
                      py::array_t<int, py::array::c_style | py::array::forcecast> cells)
{
    if (vertices.ndim() != 2 || vertices.shape(1) != 2)
        throw DomainError("vertices must have shape (n, 2)");
    if (cells.ndim() != 2 || cells.shape(1) != 3)
        throw DomainError("cells must have shape (m, 3)");
    std::vector<Point> points;
    auto v = vertices.unchecked<2>();
    for (py::ssize_t i = 0; i < v.shape(0); ++i)
        points.push_back({v(i, 0), v(i, 1)});
    std::vector<std::array<int, 3>> triangles;
    auto c = cells.unchecked<2>();
    for (py::ssize_t i = 0; i < c.shape(0); ++i)
        triangles.push_back({c(i, 0), c(i, 1), c(i, 2)});
    return Mesh(std::move(points), std::move(triangles));
}

py::dict step_dict(const StepRecord& s)
{
    py::dict d;
    d["step"] = s.step;
    d["dofs"] = s.dofs;
    d["cells"] = s.cells;
    d["eta"] = s.eta;
    d["exact_error"] = s.exact_error ? py::object(py::float_(*s.exact_error)) : py::object(py::none());
    d["efficiency"] = s.efficiency ? py::object(py::float_(*s.efficiency)) : py::object(py::none());
    d["wall_seconds"] = s.wall_seconds;
    return d;
}

} // namespace

PYBIND11_MODULE(_fraclap, m)
{
    m.doc() = "Adaptive finite elements for the spectral fractional Laplacian";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

    py::class_<RationalScheme>(m, "RationalScheme")
        .def_readonly("s", &RationalScheme::s)
        .def_readonly("kappa", &RationalScheme::kappa)
        .def_readonly("lambda0", &RationalScheme::lambda0)
        .def_readonly("m_neg", &RationalScheme::m_neg)
        .def_readonly("n_pos", &RationalScheme::n_pos)
        .def_property_readonly("weights", [](const RationalScheme& r) { return to_array(r.weights); })
        .def_property_readonly("diffusion", [](const RationalScheme& r) { return to_array(r.diffusion); })
        .def("__len__", &RationalScheme::size)
        .def("__call__", [](const RationalScheme& r, double lambda) { return evaluate_q(r, lambda); },
             py::arg("lam"))
        .def("__repr__", [](const RationalScheme& r) {
            std::ostringstream out;
            out << "RationalScheme(s=" << r.s << ", kappa=" << r.kappa << ", M=" << r.m_neg << ", N=" << r.n_pos
                << ")";
            return out.str();
        });

    m.def("build_scheme", &build_scheme, py::arg("s"), py::arg("kappa"), py::arg("lambda0") = 1.0);
    m.def("truncated_scheme", &truncated_scheme, py::arg("s"), py::arg("kappa"), py::arg("m"), py::arg("n"),
          py::arg("lambda0") = 1.0);
    m.def("epsilon_bound", &epsilon_bound, py::arg("s"), py::arg("kappa"), py::arg("lambda0") = 1.0);
    m.def("choose_kappa", &choose_kappa, py::arg("s"), py::arg("lambda0"), py::arg("f_norm"), py::arg("tol"));

    py::class_<Mesh>(m, "Mesh")
        .def(py::init(&mesh_from_arrays), py::arg("vertices"), py::arg("cells"))
        .def_property_readonly("vertices", &vertex_array)
        .def_property_readonly("cells", &cell_array)
        .def_property_readonly("num_vertices", &Mesh::num_vertices)
        .def_property_readonly("num_cells", &Mesh::num_cells)
        .def("to_json", [](const Mesh& mesh) {
            std::ostringstream out;
            io::write_mesh_json(out, mesh);
            return out.str();
        })
        .def("to_vtk", [](const Mesh& mesh, std::vector<double> u, std::vector<double> eta) {
            std::ostringstream out;
            io::write_vtk(out, mesh, u, eta);
            return out.str();
        }, py::arg("u") = std::vector<double>{}, py::arg("eta") = std::vector<double>{});

    m.def("unit_square_mesh", &unit_square_mesh, py::arg("n"), py::arg("scale") = 1.0);
    m.def("uniform_refine", [](const Mesh& mesh) { return uniform_refine(mesh).mesh; }, py::arg("mesh"));
    m.def("refine", [](const Mesh& mesh, std::vector<int> cells) {
        return refine(mesh, MarkedSet{std::move(cells), 1.0}).mesh;
    }, py::arg("mesh"), py::arg("cells"));
    m.def("validate", [](const Mesh& mesh, std::optional<double> side) {
        std::optional<Box> box;
        if (side)
            box = Box{{0.0, 0.0}, {*side, *side}};
        const ValidationReport report = validate(mesh, box);
        return py::make_tuple(report.ok, report.problems);
    }, py::arg("mesh"), py::arg("side") = py::none());
    m.def("dorfler_mark", [](std::vector<double> eta, double theta) { return dorfler_mark(eta, theta).cells; },
          py::arg("eta"), py::arg("theta"));

    m.def("fractional_solve", [](const std::string& problem, const RationalScheme& scheme, const Mesh& mesh,
                                 int threads) {
        SolveOptions options;
        options.threads = threads;
        FractionalSolution sol;
        {
            py::gil_scoped_release release;
            sol = fractional_solve(make_problem(problem), scheme, mesh, 1, options);
        }
        return py::make_tuple(to_array(sol.u), to_array(sol.error.local), sol.error.global);
    }, py::arg("problem"), py::arg("scheme"), py::arg("mesh"), py::arg("threads") = 0,
       "Returns (u at vertices, local estimators, global estimator).");

    m.def("solve", [](const std::string& problem, double s, std::optional<double> kappa, const std::string& refinement,
                      double theta, std::size_t max_dofs, std::optional<int> levels, int n, double tol, int threads) {
        AdaptiveOptions o;
        o.s = s;
        o.kappa = kappa;
        o.refinement = refinement_from_string(refinement);
        o.theta = theta;
        o.max_dofs = max_dofs;
        o.max_steps = levels.value_or(1000000);
        o.initial_n = n;
        o.tol = tol;
        o.solve.threads = threads;
        const Problem p = make_problem(problem);
        RunRecord record;
        {
            py::gil_scoped_release release;
            record = adaptive_loop(p, o);
        }
        py::list steps;
        for (const StepRecord& step : record.steps)
            steps.append(step_dict(step));
        py::dict out;
        out["problem"] = record.problem;
        out["s"] = record.s;
        out["kappa"] = record.kappa;
        out["m_neg"] = record.m_neg;
        out["n_pos"] = record.n_pos;
        out["refinement"] = to_string(record.refinement);
        out["status"] = record.status;
        out["steps"] = steps;
        std::ostringstream csv;
        io::write_history_csv(csv, record);
        out["csv"] = csv.str();
        return out;
    }, py::arg("problem"), py::arg("s"), py::arg("kappa") = py::none(), py::arg("refinement") = "adaptive",
       py::arg("theta") = 0.5, py::arg("max_dofs") = 200000, py::arg("levels") = py::none(), py::arg("n") = 0,
       py::arg("tol") = 0.0, py::arg("threads") = 0);
}
