#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "recbench/dataset.hpp"
#include "recbench/error.hpp"
#include "recbench/evaluator.hpp"
#include "recbench/ranking.hpp"
#include "recbench/runner/bench.hpp"
#include "recbench/runner/config.hpp"
#include "recbench/runner/experiment.hpp"
#include "recbench/runner/search.hpp"

namespace py = pybind11;
using namespace recbench;

namespace {

py::dict report_dict(const MetricReport& r) {
  py::dict d;
  for (const auto& [k, v] : r.values) d[py::str(k)] = v;
  return d;
}

py::dict run_dict(const RunResult& r) {
  py::dict d;
  d["dir"] = r.dir.string();
  d["config_hash"] = r.config_hash;
  d["finished"] = r.finished;
  d["epochs_run"] = r.epochs_run;
  d["best_epoch"] = r.best_epoch;
  d["best_valid"] = r.best_valid ? py::object(py::float_(*r.best_valid)) : py::object(py::none());
  d["valid"] = r.valid_report ? py::object(report_dict(*r.valid_report)) : py::object(py::none());
  d["test"] = r.test_report ? py::object(report_dict(*r.test_report)) : py::object(py::none());
  py::list history;
  for (const auto& e : r.history) {
    py::dict h;
    h["epoch"] = e.epoch;
    h["loss"] = e.loss;
    h["valid"] = e.valid;
    h["improved"] = e.improved;
    history.append(h);
  }
  d["history"] = history;
  return d;
}

py::list trials_list(const std::vector<TrialResult>& trials) {
  py::list out;
  for (const auto& t : trials) {
    py::dict d;
    d["index"] = t.index;
    py::dict params;
    for (const auto& [k, v] : t.assignment) params[py::str(k)] = v;
    d["params"] = params;
    d["best_valid"] = t.best_valid;
    d["test"] = report_dict(t.test);
    d["seconds"] = t.seconds;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the recbench recommender benchmarking engine.";

  static py::exception<Error> base(m, "RecbenchError");
  static py::exception<ParseError> parse_error(m, "ParseError", base.ptr());
  static py::exception<SchemaError> schema_error(m, "SchemaError", base.ptr());
  static py::exception<DataError> data_error(m, "DataError", base.ptr());
  static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
  static py::exception<CheckpointError> checkpoint_error(m, "CheckpointError", base.ptr());
  static py::exception<IoError> io_error(m, "IoError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      parse_error(e.what());
    } catch (const SchemaError& e) {
      schema_error(e.what());
    } catch (const DataError& e) {
      data_error(e.what());
    } catch (const ConfigError& e) {
      config_error(e.what());
    } catch (const CheckpointError& e) {
      checkpoint_error(e.what());
    } catch (const IoError& e) {
      io_error(e.what());
    } catch (const Error& e) {
      base(e.what());
    }
  });

  py::class_<Config>(m, "Config")
      .def(py::init<>())
      .def_static(
          "load",
          [](const std::optional<std::filesystem::path>& path, const std::vector<std::string>& overrides) {
            return load_config(path, overrides);
          },
          py::arg("path") = std::nullopt, py::arg("overrides") = std::vector<std::string>{})
      .def_static(
          "from_text",
          [](const std::string& text, const std::vector<std::string>& overrides,
             const std::filesystem::path& base_dir) { return config_from_text(text, overrides, base_dir); },
          py::arg("text"), py::arg("overrides") = std::vector<std::string>{},
          py::arg("base_dir") = std::filesystem::path{})
      .def("get", &Config::get, py::arg("key"))
      .def("set", &Config::set, py::arg("key"), py::arg("value"))
      .def("validate", &Config::validate)
      .def("hash", &Config::hash)
      .def("serialize", &Config::serialize)
      .def("values", &Config::values)
      .def("__repr__", [](const Config& c) { return "<Config " + c.hash() + ">"; });

  m.def(
      "topk",
      [](py::array_t<float, py::array::c_style | py::array::forcecast> scores, std::size_t k) {
        if (scores.ndim() != 2) throw DataError("scores must be a 2-D array");
        ScoreMatrix s;
        s.rows = static_cast<std::size_t>(scores.shape(0));
        s.cols = static_cast<std::size_t>(scores.shape(1));
        s.values.assign(scores.data(), scores.data() + scores.size());
        TopKIndexMatrix top;
        {
          py::gil_scoped_release release;
          top = topk_find(s, k);
        }
        py::array_t<std::int32_t> out({static_cast<py::ssize_t>(top.rows), static_cast<py::ssize_t>(top.k)});
        std::copy(top.indices.begin(), top.indices.end(), out.mutable_data());
        return out;
      },
      py::arg("scores"), py::arg("k"),
      "Indices of the k highest scores per row, best first, ties to the lower index.");

  m.def(
      "ranking_metrics",
      [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> hits,
         py::array_t<std::int64_t, py::array::c_style | py::array::forcecast> pos_counts,
         const std::vector<std::size_t>& ks, const std::vector<std::string>& metrics) {
        if (hits.ndim() != 2 || pos_counts.ndim() != 1 || pos_counts.shape(0) != hits.shape(0)) {
          throw DataError("hits must be n x K and pos_counts length n");
        }
        HitMatrix h;
        h.rows = static_cast<std::size_t>(hits.shape(0));
        h.k = static_cast<std::size_t>(hits.shape(1));
        h.hits.assign(hits.data(), hits.data() + hits.size());
        h.pos_counts.assign(pos_counts.data(), pos_counts.data() + pos_counts.size());
        return report_dict(summarize(h, metrics, ks, MetricRegister::with_defaults()));
      },
      py::arg("hits"), py::arg("pos_counts"), py::arg("ks"),
      py::arg("metrics") = std::vector<std::string>{"recall", "precision", "ndcg", "mrr"},
      "Mean metric@K values from a binary hit matrix.");

  m.def(
      "dataset_info",
      [](const std::filesystem::path& prefix, const std::string& separator) {
        ParseOptions opts;
        if (separator.size() != 1) throw ConfigError("separator must be one character");
        opts.separator = separator[0];
        const auto ds = load_dataset(prefix, opts);
        py::dict d;
        d["n_users"] = ds.n_users() - 1;
        d["n_items"] = ds.n_items() - 1;
        d["n_interactions"] = ds.interaction_count();
        d["has_user_features"] = ds.user_features().has_value();
        d["has_item_features"] = ds.item_features().has_value();
        return d;
      },
      py::arg("prefix"), py::arg("separator") = ",",
      "Counts for the atomic files at `prefix` (padding excluded).");

  m.def(
      "run", [](const Config& cfg) { return run_dict(run_experiment(cfg)); }, py::arg("config"),
      "Preprocess, split, train and evaluate; writes the run directory.");

  m.def(
      "resume",
      [](const std::filesystem::path& checkpoint, const std::optional<Config>& config, bool force) {
        return run_dict(resume_experiment(checkpoint, config, force));
      },
      py::arg("checkpoint"), py::arg("config") = std::nullopt, py::arg("force") = false);

  m.def(
      "grid_search",
      [](const Config& cfg, const std::string& space, std::size_t jobs) {
        return trials_list(grid_search(cfg, parse_range_text(space), jobs));
      },
      py::arg("config"), py::arg("space"), py::arg("jobs") = 1,
      "Every combination of the `name=[v1,...]` lines in `space`, best first.");

  m.def(
      "random_search",
      [](const Config& cfg, const std::string& space, std::size_t trials, std::uint64_t seed,
         std::size_t jobs) {
        return trials_list(random_search(cfg, parse_range_text(space), trials, seed, jobs));
      },
      py::arg("config"), py::arg("space"), py::arg("trials"), py::arg("seed") = 2020, py::arg("jobs") = 1);

  m.def(
      "bench",
      [](std::size_t users, std::size_t items, std::size_t k, std::size_t repeats, std::uint64_t seed) {
        BenchOptions o;
        o.users = users;
        o.items = items;
        o.k = k;
        o.repeats = repeats;
        o.seed = seed;
        BenchResult r;
        {
          py::gil_scoped_release release;
          r = bench_eval(o);
        }
        py::dict d;
        d["accelerated_seconds"] = r.accelerated_seconds;
        d["naive_seconds"] = r.naive_seconds;
        d["speedup"] = r.speedup;
        d["identical"] = r.identical;
        d["report"] = r.accelerated_report;
        return d;
      },
      py::arg("users") = 5000, py::arg("items") = 10000, py::arg("k") = 10, py::arg("repeats") = 10,
      py::arg("seed") = 2020);
}
