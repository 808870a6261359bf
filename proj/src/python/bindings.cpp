#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "arena/agents.hpp"
#include "arena/config.hpp"
#include "arena/episode.hpp"
#include "arena/observations.hpp"
#include "arena/procgen.hpp"
#include "arena/protocol.hpp"

namespace py = pybind11;
using namespace arena;

namespace {

Action to_action(int index) {
  const auto a = action_from_index(index);
  if (!a) throw py::value_error("action must be an integer in [0, 8]");
  return *a;
}

// Owns the config so the episode can be reset without re-parsing.
class PyEpisode {
 public:
  PyEpisode(const std::string& text, int arena_index, std::uint64_t seed)
      : file_(config::load_config(text)),
        arena_index_(arena_index),
        ep_(std::make_unique<Episode>(Episode::from_config(file_, arena_index, seed))) {}

  void reset(std::uint64_t seed) { ep_ = std::make_unique<Episode>(Episode::from_config(file_, arena_index_, seed)); }

  py::dict step(int action) {
    const StepResult r = ep_->step(to_action(action));
    py::dict d;
    d["reward_delta"] = r.reward_delta;
    d["done"] = r.done;
    d["done_reason"] = std::string(done_reason_name(r.reason));
    d["step"] = r.step;
    d["health"] = r.health;
    d["reward"] = ep_->reward();
    return d;
  }

  py::array_t<double> raycast(int rays, double fov) const {
    const auto m = raycast_observation(ep_->world(), rays, fov, ep_->lights_on());
    py::array_t<double> out({8, rays});
    std::copy(m.begin(), m.end(), out.mutable_data());
    return out;
  }

  py::array_t<std::uint8_t> camera(int size, bool grayscale) const {
    const Image img = camera_observation(ep_->world(), size, grayscale, ep_->lights_on());
    py::array_t<std::uint8_t> out({img.height, img.width, img.channels});
    std::copy(img.pixels.begin(), img.pixels.end(), out.mutable_data());
    return out;
  }

  py::array_t<double> vector() const {
    const auto v = vector_observation(ep_->world(), ep_->health());
    py::array_t<double> out(7);
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
  }

  const Episode& episode() const { return *ep_; }
  Episode& episode() { return *ep_; }

 private:
  config::ArenaConfigFile file_;
  int arena_index_;
  std::unique_ptr<Episode> ep_;
};

py::list diagnostics_of(const config::Diagnostics& diags) {
  py::list out;
  for (const auto& d : diags) {
    py::dict x;
    x["severity"] = d.severity == config::Severity::Error ? "error" : "warning";
    x["line"] = d.line;
    x["column"] = d.column;
    x["path"] = d.path;
    x["message"] = d.message;
    out.append(x);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Headless arena simulator core";
  m.attr("__version__") = version_string();
  m.attr("PROTOCOL_VERSION") = std::string(protocol::kVersion);
  m.attr("ACTION_COUNT") = kActionCount;

  py::register_exception<config::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<EpisodeError>(m, "EpisodeError", PyExc_RuntimeError);
  py::register_exception<procgen::ProcgenError>(m, "ProcgenError", PyExc_ValueError);
  py::register_exception<agents::AgentError>(m, "AgentError", PyExc_ValueError);

  m.def("action_names", [] {
    std::vector<std::string> names;
    for (int i = 0; i < kActionCount; ++i) names.emplace_back(action_name(*action_from_index(i)));
    return names;
  });

  m.def(
      "validate",
      [](const std::string& text) {
        auto r = config::parse_config(text);
        config::Diagnostics d = r.diagnostics;
        if (r.config && !config::has_errors(d)) {
          const auto v = config::validate(*r.config);
          d.insert(d.end(), v.begin(), v.end());
        }
        return diagnostics_of(d);
      },
      py::arg("text"), "Parse and validate config text; returns a list of diagnostics.");

  m.def(
      "canonical",
      [](const std::string& text) { return config::serialize(config::load_config(text)); },
      py::arg("text"), "Canonical text form of a valid config.");

  py::class_<PyEpisode>(m, "Episode")
      .def(py::init<const std::string&, int, std::uint64_t>(), py::arg("config_text"), py::arg("arena_index") = 0,
           py::arg("seed") = 0)
      .def("reset", &PyEpisode::reset, py::arg("seed"))
      .def("step", &PyEpisode::step, py::arg("action"))
      .def("skip", [](PyEpisode& e) { e.episode().skip(); })
      .def("raycast", &PyEpisode::raycast, py::arg("rays") = 15, py::arg("fov") = 60.0)
      .def("camera", &PyEpisode::camera, py::arg("size") = 64, py::arg("grayscale") = false)
      .def("vector", &PyEpisode::vector)
      .def("trajectory_csv", [](const PyEpisode& e) { return e.episode().trajectory().to_csv(); })
      .def_property_readonly("reward", [](const PyEpisode& e) { return e.episode().reward(); })
      .def_property_readonly("health", [](const PyEpisode& e) { return e.episode().health(); })
      .def_property_readonly("step_index", [](const PyEpisode& e) { return e.episode().step_index(); })
      .def_property_readonly("t", [](const PyEpisode& e) { return e.episode().t(); })
      .def_property_readonly("pass_mark", [](const PyEpisode& e) { return e.episode().pass_mark(); })
      .def_property_readonly("done", [](const PyEpisode& e) { return e.episode().done(); })
      .def_property_readonly("done_reason",
                             [](const PyEpisode& e) { return std::string(done_reason_name(e.episode().done_reason())); })
      .def_property_readonly("lights_on", [](const PyEpisode& e) { return e.episode().lights_on(); })
      .def_property_readonly("seed", [](const PyEpisode& e) { return e.episode().seed(); });

  m.def(
      "verify_replay",
      [](const std::string& config_text, const std::string& csv) {
        const auto v = verify_replay(config::load_config(config_text), csv);
        return py::make_tuple(v.exact, v.first_divergent_step, v.message);
      },
      py::arg("config_text"), py::arg("trajectory_csv"));

  m.def(
      "expand_template",
      [](const std::string& text, std::optional<int> sample, std::uint64_t seed) {
        procgen::ExpansionMode mode = procgen::Exhaustive{};
        if (sample) mode = procgen::Sample{*sample, seed};
        py::list out;
        for (const auto& g : procgen::expand_template(text, mode)) {
          py::list choices;
          for (const auto& c : g.choices) choices.append(py::make_tuple(c.directive, c.value));
          py::dict d;
          d["text"] = g.text;
          d["choices"] = choices;
          d["seed"] = g.seed;
          out.append(d);
        }
        return out;
      },
      py::arg("text"), py::arg("sample") = py::none(), py::arg("seed") = 0,
      "Exhaustive expansion by default; pass sample=N for seeded sampling.");
  m.def("exhaustive_count", [](const std::string& text) { return procgen::exhaustive_count(text); });

  m.def(
      "evaluate",
      [](const std::vector<std::filesystem::path>& configs, const std::string& agent, int episodes,
         std::uint64_t seed, int workers) {
        agents::EvaluationOptions opt;
        opt.workers = workers;
        agents::EvaluationReport report;
        {
          py::gil_scoped_release release;
          report = agents::run_evaluation(configs, agents::AgentSpec::parse(agent), episodes, seed, opt);
        }
        return report.to_csv();
      },
      py::arg("configs"), py::arg("agent"), py::arg("episodes") = 100, py::arg("seed") = 0, py::arg("workers") = 1,
      "Runs an agent battery; returns the report as CSV text.");

  m.def(
      "rank_sum_test",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto r = agents::rank_sum_test(a, b);
        py::dict d;
        d["rank_sum"] = r.rank_sum;
        d["u"] = r.u;
        d["z"] = r.z;
        d["p_value"] = r.p_value;
        d["exact"] = r.exact;
        return d;
      },
      py::arg("a"), py::arg("b"));

  py::class_<protocol::Session>(m, "Session", "In-process protocol session (same messages as the server).")
      .def(py::init<std::string>(), py::arg("id") = "python")
      .def("handle", &protocol::Session::handle_text, py::arg("message"));
}
