#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "llqr/baseline.hpp"
#include "llqr/controller.hpp"
#include "llqr/feasibility.hpp"
#include "llqr/llqr.hpp"
#include "llqr/plant.hpp"
#include "llqr/sparsity.hpp"

namespace py = pybind11;
using namespace llqr;

namespace {

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> pattern_to_dense(const SparsityPattern& p) {
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> out(p.rows(), p.cols());
    for (Index i = 0; i < p.rows(); ++i)
        for (Index j = 0; j < p.cols(); ++j) out(i, j) = p.get(i, j);
    return out;
}

SparsityPattern pattern_from_dense(
    const Eigen::Ref<const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>>& dense) {
    SparsityPattern p(dense.rows(), dense.cols());
    for (Index i = 0; i < dense.rows(); ++i)
        for (Index j = 0; j < dense.cols(); ++j)
            if (dense(i, j)) p.set(i, j);
    return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Localized LQR synthesis, feasibility tests and closed-loop simulation";

    py::class_<SparsityPattern>(m, "SparsityPattern")
        .def(py::init<Index, Index>(), py::arg("rows"), py::arg("cols"))
        .def_static("identity", &SparsityPattern::identity)
        .def_static("ones", &SparsityPattern::ones)
        .def_static("from_dense", &pattern_from_dense)
        .def_property_readonly("rows", &SparsityPattern::rows)
        .def_property_readonly("cols", &SparsityPattern::cols)
        .def("get", &SparsityPattern::get)
        .def("set", &SparsityPattern::set, py::arg("i"), py::arg("j"), py::arg("value") = true)
        .def("nnz", &SparsityPattern::nnz)
        .def("entries", &SparsityPattern::entries)
        .def("subset_of", &SparsityPattern::subset_of)
        .def("transposed", &SparsityPattern::transposed)
        .def("to_dense", &pattern_to_dense)
        .def("__eq__", [](const SparsityPattern& a, const SparsityPattern& b) { return a == b; })
        .def("__or__", [](const SparsityPattern& a, const SparsityPattern& b) { return a | b; });

    m.def("support", &support, py::arg("matrix"), py::arg("tol") = kSupportTolerance);
    m.def("pattern_product", &pattern_product);
    m.def("pattern_power", &pattern_power);
    m.def("pattern_power_union", &pattern_power_union);
    m.def("graph_distance", &graph_distance, py::arg("pattern"), py::arg("from_node"),
          py::arg("to_node"));
    py::enum_<Direction>(m, "Direction")
        .value("incoming", Direction::incoming)
        .value("outgoing", Direction::outgoing);
    m.def("localized_region", &localized_region, py::arg("pattern"), py::arg("j"), py::arg("d"),
          py::arg("direction"));
    m.def("is_d_localized",
          py::overload_cast<const SparsityPattern&, const SparsityPattern&, int>(&is_d_localized));

    py::class_<ConstraintSpace>(m, "ConstraintSpace")
        .def(py::init<std::vector<SparsityPattern>>())
        .def_property_readonly("horizon", &ConstraintSpace::horizon)
        .def("tap", &ConstraintSpace::tap, py::return_value_policy::copy);

    py::class_<LocalizedConstraints>(m, "LocalizedConstraints")
        .def_readonly("state_space", &LocalizedConstraints::state_space)
        .def_readonly("control_space", &LocalizedConstraints::control_space);
    m.def("build_localized_fir_constraints", &build_localized_fir_constraints,
          py::arg("a_pattern"), py::arg("b_pattern"), py::arg("d"), py::arg("T"), py::arg("h"));
    m.def("validate_localized_fir_constraints", &validate_localized_fir_constraints);

    py::class_<Plant>(m, "Plant")
        .def(py::init<Eigen::MatrixXd, Eigen::MatrixXd>(), py::arg("A"), py::arg("B"))
        .def_property_readonly("A", &Plant::A, py::return_value_policy::copy)
        .def_property_readonly("B", &Plant::B, py::return_value_policy::copy)
        .def_property_readonly("A_pattern", &Plant::A_pattern, py::return_value_policy::copy)
        .def_property_readonly("B_pattern", &Plant::B_pattern, py::return_value_policy::copy)
        .def_property_readonly("num_states", &Plant::num_states)
        .def_property_readonly("num_controls", &Plant::num_controls);
    m.def("make_chain_benchmark", &make_chain_benchmark);
    m.def("load_plant", py::overload_cast<const std::string&>(&load_plant));
    m.def("save_plant", py::overload_cast<const std::string&, const Plant&>(&save_plant));

    py::class_<ReducedPlant>(m, "ReducedPlant")
        .def_readonly("j", &ReducedPlant::j)
        .def_readonly("d", &ReducedPlant::d)
        .def_readonly("state_map", &ReducedPlant::state_map)
        .def_readonly("control_map", &ReducedPlant::control_map)
        .def_readonly("A_loc", &ReducedPlant::A_loc)
        .def_readonly("B_loc", &ReducedPlant::B_loc)
        .def_readonly("w_slot", &ReducedPlant::w_slot);
    m.def("reduce", &reduce, py::arg("plant"), py::arg("j"), py::arg("d"));
    m.def("embed_state", &embed_state);
    m.def("embed_control", &embed_control);

    py::class_<ClosedLoopMaps>(m, "ClosedLoopMaps")
        .def(py::init<std::vector<Eigen::MatrixXd>, std::vector<Eigen::MatrixXd>>(),
             py::arg("r_taps"), py::arg("m_taps"))
        .def_property_readonly("horizon", &ClosedLoopMaps::horizon)
        .def_property_readonly("num_states", &ClosedLoopMaps::num_states)
        .def_property_readonly("num_controls", &ClosedLoopMaps::num_controls)
        .def("R", &ClosedLoopMaps::R, py::return_value_policy::copy)
        .def("M", &ClosedLoopMaps::M, py::return_value_policy::copy);
    m.def("save_maps", py::overload_cast<const std::string&, const ClosedLoopMaps&>(&save_maps));
    m.def("load_maps", py::overload_cast<const std::string&>(&load_maps));
    m.def("recursion_residual", &recursion_residual);
    m.def("feasibility_tolerance", &feasibility_tolerance);

    py::class_<ColumnVerdict>(m, "ColumnVerdict")
        .def_readonly("column", &ColumnVerdict::column)
        .def_readonly("feasible", &ColumnVerdict::feasible)
        .def_readonly("residual", &ColumnVerdict::residual);
    py::class_<GlobalSolveResult>(m, "GlobalSolveResult")
        .def_readonly("feasible", &GlobalSolveResult::feasible)
        .def_readonly("columns", &GlobalSolveResult::columns)
        .def_readonly("infeasible_columns", &GlobalSolveResult::infeasible_columns)
        .def_readonly("maps", &GlobalSolveResult::maps);
    m.def("solve_global", &solve_global);
    py::class_<LocalizabilityReport>(m, "LocalizabilityReport")
        .def_readonly("d", &LocalizabilityReport::d)
        .def_readonly("T", &LocalizabilityReport::T)
        .def_readonly("h", &LocalizabilityReport::h)
        .def_readonly("localizable", &LocalizabilityReport::localizable)
        .def_readonly("columns", &LocalizabilityReport::columns);
    m.def("check_localizable", &check_localizable, py::arg("plant"), py::arg("d"), py::arg("T"),
          py::arg("h"));

    py::class_<CostWeights>(m, "CostWeights")
        .def(py::init<Eigen::MatrixXd, Eigen::MatrixXd>(), py::arg("Q"), py::arg("Rw"))
        .def_static("identity", &CostWeights::identity)
        .def_property_readonly("Q", &CostWeights::Q, py::return_value_policy::copy)
        .def_property_readonly("Rw", &CostWeights::Rw, py::return_value_policy::copy);
    py::class_<ColumnSynthesis>(m, "ColumnSynthesis")
        .def_readonly("column", &ColumnSynthesis::column)
        .def_readonly("feasible", &ColumnSynthesis::feasible)
        .def_readonly("residual", &ColumnSynthesis::residual)
        .def_readonly("objective", &ColumnSynthesis::objective)
        .def_readonly("solve_seconds", &ColumnSynthesis::solve_seconds);
    py::class_<SynthesisResult>(m, "SynthesisResult")
        .def_readonly("feasible", &SynthesisResult::feasible)
        .def_readonly("objective", &SynthesisResult::objective)
        .def_readonly("columns", &SynthesisResult::columns)
        .def_readonly("infeasible_columns", &SynthesisResult::infeasible_columns)
        .def_readonly("maps", &SynthesisResult::maps);
    m.def("synthesize_llqr", &synthesize_llqr, py::arg("plant"), py::arg("state_space"),
          py::arg("control_space"), py::arg("T"), py::arg("weights"));
    m.def("evaluate_awgn_cost", &evaluate_awgn_cost);

    py::enum_<Scheme>(m, "Scheme")
        .value("receding", Scheme::receding)
        .value("naive", Scheme::naive);
    py::class_<SimTrace>(m, "SimTrace")
        .def_readonly("x_log", &SimTrace::x_log)
        .def_readonly("u_log", &SimTrace::u_log)
        .def_readonly("we_log", &SimTrace::we_log)
        .def_readonly("w_log", &SimTrace::w_log)
        .def_readonly("overflow", &SimTrace::overflow)
        .def_readonly("overflow_step", &SimTrace::overflow_step)
        .def_readonly("steps", &SimTrace::steps);
    m.def("simulate", &simulate, py::arg("plant"), py::arg("maps"), py::arg("disturbances"),
          py::arg("scheme") = Scheme::receding);
    m.def("perturb_maps", &perturb_maps);
    py::class_<SensitivityReport>(m, "SensitivityReport")
        .def_readonly("delta_scale", &SensitivityReport::delta_scale)
        .def_readonly("steps", &SensitivityReport::steps)
        .def_readonly("receding_final_norm", &SensitivityReport::receding_final_norm)
        .def_readonly("naive_final_norm", &SensitivityReport::naive_final_norm)
        .def_readonly("receding_max_norm", &SensitivityReport::receding_max_norm)
        .def_readonly("naive_max_norm", &SensitivityReport::naive_max_norm)
        .def_readonly("receding_overflow", &SensitivityReport::receding_overflow)
        .def_readonly("naive_overflow", &SensitivityReport::naive_overflow);
    m.def("sensitivity_experiment", &sensitivity_experiment, py::arg("plant"), py::arg("maps"),
          py::arg("delta_scale"), py::arg("seed"), py::arg("steps") = 300);
    m.def("impulse_disturbance", &impulse_disturbance, py::arg("steps"), py::arg("n"),
          py::arg("site"), py::arg("time"));
    m.def("awgn_disturbance", &awgn_disturbance, py::arg("steps"), py::arg("n"),
          py::arg("variance"), py::arg("seed"));

    py::class_<RiccatiSolution>(m, "RiccatiSolution")
        .def_readonly("P", &RiccatiSolution::P)
        .def_readonly("K_gain", &RiccatiSolution::K_gain)
        .def_readonly("iterations", &RiccatiSolution::iterations)
        .def_readonly("residual", &RiccatiSolution::residual);
    m.def("solve_dare", &solve_dare, py::arg("plant"), py::arg("weights"),
          py::arg("tol") = kRiccatiTolerance, py::arg("max_iterations") = kRiccatiMaxIterations);
    m.def("centralized_h2_objective", &centralized_h2_objective);
    m.def("spectral_radius", &spectral_radius);
}
