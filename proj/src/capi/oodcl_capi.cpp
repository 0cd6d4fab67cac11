#include "oodcl/oodcl.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "core/checkpoint.hpp"
#include "core/commands.hpp"
#include "core/network.hpp"
#include "core/run_config.hpp"

namespace {

thread_local std::string g_last_error = "no error";

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

oodcl_status fail(oodcl_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Config/parse problems map to exit code 2, everything else to 3.
template <typename Fn>
oodcl_status guarded(Fn&& fn) {
  try {
    fn();
    return OODCL_OK;
  } catch (const oodcl::ConfigError& e) {
    return fail(OODCL_ERR_CONFIG, e.what());
  } catch (const oodcl::ParseError& e) {
    return fail(OODCL_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(OODCL_ERR_RUNTIME, e.what());
  }
}

}  // namespace

struct oodcl_config {
  oodcl::config::RunConfig cfg;
};

struct oodcl_model {
  oodcl::train::TrainedModel model;
};

extern "C" {

const char* oodcl_last_error(void) { return g_last_error.c_str(); }

const char* oodcl_version(void) { return "oodcl 1.0.0"; }

oodcl_status oodcl_config_load(const char* path, const char* const* overrides,
                               size_t n_overrides, oodcl_config** out_config) {
  if (!path || !out_config || (n_overrides > 0 && !overrides)) {
    return fail(OODCL_ERR_CONFIG, "config_load: null argument");
  }
  *out_config = nullptr;
  return guarded([&] {
    std::vector<std::string> ov(overrides, overrides + n_overrides);
    auto handle = std::make_unique<oodcl_config>();
    handle->cfg = oodcl::config::parse_config(path, ov);
    *out_config = handle.release();
  });
}

void oodcl_config_free(oodcl_config* config) { delete config; }

oodcl_status oodcl_gen_data(const oodcl_config* config, char** out_summary) {
  if (!config) return fail(OODCL_ERR_CONFIG, "gen_data: null config");
  return guarded([&] {
    const std::string summary = oodcl::cmd::gen_data(config->cfg);
    if (out_summary) *out_summary = dup_string(summary);
  });
}

oodcl_status oodcl_train(const oodcl_config* config, const char* variant,
                         char** out_summary) {
  if (!config || !variant) {
    return fail(OODCL_ERR_CONFIG, "train: null config or variant");
  }
  return guarded([&] {
    const auto v = oodcl::config::variant_from_name(variant);
    const std::string summary = oodcl::cmd::train(config->cfg, v);
    if (out_summary) *out_summary = dup_string(summary);
  });
}

oodcl_status oodcl_eval(const oodcl_config* config, const char* checkpoint_path,
                        const char* score, char** out_report_json,
                        char** out_report_path) {
  if (!config || !checkpoint_path) {
    return fail(OODCL_ERR_CONFIG, "eval: null config or checkpoint path");
  }
  return guarded([&] {
    const auto fn = score ? oodcl::config::score_from_name(score)
                          : config->cfg.score;
    const auto out = oodcl::cmd::eval(config->cfg, checkpoint_path, fn);
    if (out_report_json) *out_report_json = dup_string(out.json);
    if (out_report_path) *out_report_path = dup_string(out.path.string());
  });
}

oodcl_status oodcl_compare(const oodcl_config* config,
                           const char* const* variants, size_t n_variants,
                           char** out_table, char** out_json) {
  if (!config || (n_variants > 0 && !variants)) {
    return fail(OODCL_ERR_CONFIG, "compare: null argument");
  }
  return guarded([&] {
    std::vector<oodcl::config::CliVariant> vs;
    if (n_variants == 0) {
      vs = config->cfg.compare_variants;
    } else {
      for (size_t i = 0; i < n_variants; ++i) {
        vs.push_back(oodcl::config::variant_from_name(variants[i]));
      }
    }
    const auto out = oodcl::cmd::compare(config->cfg, vs);
    if (out_table) *out_table = dup_string(out.table);
    if (out_json) *out_json = dup_string(out.json);
  });
}

void oodcl_string_free(char* s) { std::free(s); }

oodcl_status oodcl_model_load(const char* checkpoint_path,
                              oodcl_model** out_model) {
  if (!checkpoint_path || !out_model) {
    return fail(OODCL_ERR_CONFIG, "model_load: null argument");
  }
  *out_model = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<oodcl_model>();
    handle->model = oodcl::checkpoint::load_model(checkpoint_path);
    *out_model = handle.release();
  });
}

void oodcl_model_free(oodcl_model* model) { delete model; }

oodcl_status oodcl_model_input_dim(const oodcl_model* model, size_t* out_dim) {
  if (!model || !out_dim) {
    return fail(OODCL_ERR_CONFIG, "model_input_dim: null argument");
  }
  *out_dim = model->model.params.dims.input_dim;
  return OODCL_OK;
}

oodcl_status oodcl_model_classify(const oodcl_model* model, const double* x,
                                  size_t dim, int* out_class) {
  if (!model || !x || !out_class) {
    return fail(OODCL_ERR_CONFIG, "model_classify: null argument");
  }
  return guarded([&] {
    const auto f = oodcl::net::forward_encoder(model->model.params, {x, dim});
    const auto logits = oodcl::train::model_logits(model->model, f);
    size_t best = 0;
    for (size_t k = 1; k < logits.size(); ++k) {
      if (logits[k] > logits[best]) best = k;
    }
    *out_class = model->model.protos.class_ids.empty()
                     ? int(best)
                     : model->model.protos.class_ids[best];
  });
}

oodcl_status oodcl_model_score(const oodcl_model* model, const double* x,
                               size_t dim, const char* score,
                               double temperature, double* out_score) {
  if (!model || !x || !score || !out_score) {
    return fail(OODCL_ERR_CONFIG, "model_score: null argument");
  }
  return guarded([&] {
    const auto fn = oodcl::config::score_from_name(score);
    const auto f = oodcl::net::forward_encoder(model->model.params, {x, dim});
    const auto logits = oodcl::train::model_logits(model->model, f);
    *out_score = oodcl::proto::score_logits(logits, fn, temperature);
  });
}

}  // extern "C"
