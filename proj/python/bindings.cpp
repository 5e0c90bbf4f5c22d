#include <sstream>

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/eigen.h>

#include "percept/cli.hpp"
#include "percept/error.hpp"
#include "percept/global.hpp"
#include "percept/gradient_explainers.hpp"
#include "percept/models.hpp"
#include "percept/shap.hpp"
#include "percept/weights_io.hpp"

namespace py = pybind11;
using namespace percept;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const FloatArray& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor(std::move(shape), std::vector<float>(a.data(), a.data() + a.size()));
}

FloatArray to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  FloatArray out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

FloatArray map_array(const SaliencyMap& m) {
  FloatArray out({m.height, m.width});
  std::copy(m.values.begin(), m.values.end(), out.mutable_data());
  return out;
}

CamMethod cam_method(const std::string& name) {
  if (name == "gradcam") return CamMethod::kGradCam;
  if (name == "gradcampp") return CamMethod::kGradCamPlusPlus;
  if (name == "scorecam") return CamMethod::kScoreCam;
  throw py::value_error("method must be gradcam, gradcampp or scorecam");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "percept: post-hoc interpretation engine";

  py::register_exception<Error>(m, "PerceptError", PyExc_RuntimeError);

  py::class_<Network>(m, "Network")
      .def_property_readonly("input_shape", &Network::input_shape)
      .def_property_readonly("class_count", &Network::class_count)
      .def("layer_names", &Network::layer_names)
      .def("save", [](const Network& n, const std::string& path) { save_network(n, path); }, py::arg("path"))
      .def(
          "forward",
          [](const Network& n, const FloatArray& x) {
            const ForwardPass pass(n, to_tensor(x));
            return py::make_tuple(to_array(pass.logits()), to_array(pass.probs()));
          },
          py::arg("image"), "Returns (logits, probabilities).");

  m.def("reference_cnn", &build_reference_cnn, py::arg("seed") = 7);
  m.def("quadrant_cnn", &build_quadrant_planted_cnn, py::arg("seed") = 7);
  m.def("load_network", [](const std::string& path) { return load_network(path); }, py::arg("path"));

  m.def(
      "gradient_check",
      [](const Network& n, const FloatArray& x, int target, double eps) { return gradient_check(n, to_tensor(x), target, eps); },
      py::arg("net"), py::arg("image"), py::arg("target"), py::arg("epsilon") = 1e-4);

  m.def(
      "cam",
      [](const Network& n, const FloatArray& x, const std::string& layer, std::optional<int> target,
         const std::string& method) {
        return map_array(class_activation_map(n, to_tensor(x), {cam_method(method), layer, target}).map);
      },
      py::arg("net"), py::arg("image"), py::arg("layer"), py::arg("target") = py::none(),
      py::arg("method") = "gradcam");

  m.def(
      "vanilla",
      [](const Network& n, const FloatArray& x, int target) { return to_array(vanilla_bp(n, to_tensor(x), target).raw); },
      py::arg("net"), py::arg("image"), py::arg("target"));
  m.def(
      "guided",
      [](const Network& n, const FloatArray& x, int target) { return to_array(guided_bp(n, to_tensor(x), target).raw); },
      py::arg("net"), py::arg("image"), py::arg("target"));
  m.def(
      "smooth_grad",
      [](const Network& n, const FloatArray& x, int target, int samples, double sigma, std::uint64_t seed) {
        return to_array(smooth_grad(n, to_tensor(x), target, {samples, sigma, seed}).raw);
      },
      py::arg("net"), py::arg("image"), py::arg("target"), py::arg("samples") = 50, py::arg("sigma") = 0.15,
      py::arg("seed") = 0);
  m.def(
      "integrated_gradients",
      [](const Network& n, const FloatArray& x, std::optional<FloatArray> baseline, int steps, int target) {
        const Tensor input = to_tensor(x);
        const Tensor base = baseline ? to_tensor(*baseline) : Tensor::zeros_like(input);
        return to_array(integrated_gradients(n, input, base, steps, target).raw);
      },
      py::arg("net"), py::arg("image"), py::arg("baseline") = py::none(), py::arg("steps") = 64, py::arg("target") = 0);

  m.def(
      "kernel_shap",
      [](const std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>& game, int d, bool exact, int num_samples,
         std::uint64_t seed) {
        const ShapValues v = kernel_shap(game, d, {exact, num_samples, seed, d});
        return py::make_tuple(v.base_value, v.phi, v.evaluations);
      },
      py::arg("game"), py::arg("d"), py::arg("exact") = false, py::arg("num_samples") = 2048, py::arg("seed") = 0,
      "game maps an (n, d) 0/1 matrix to n values. Returns (base_value, phi, evaluations).");

  m.def(
      "maximize_activation",
      [](const Network& n, const std::string& layer, int filter, int num_iter, std::optional<double> lr,
         std::uint64_t seed) {
        OptimizationConfig cfg = default_ascent_config({TargetKind::kFilter, layer, filter});
        cfg.num_iter = num_iter;
        cfg.seed = seed;
        if (lr) cfg.learning_rate = *lr;
        const OptimizationTrace t = maximize_activation(n, cfg);
        return py::make_tuple(to_array(t.image), t.objectives, t.final_objective);
      },
      py::arg("net"), py::arg("layer"), py::arg("filter"), py::arg("num_iter") = 10, py::arg("lr") = py::none(),
      py::arg("seed") = 0, "Returns (image, objectives, final_objective).");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli_main(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the percept command line in-process. Returns (exit_code, stdout, stderr).");
}
