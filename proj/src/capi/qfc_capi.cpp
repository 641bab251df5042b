#include "qfc/qfc.h"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <string>

#include "qfc/control.hpp"
#include "qfc/entropy.hpp"
#include "qfc/experiments.hpp"
#include "qfc/steady.hpp"

struct qfc_config {
  qfc::ExperimentConfig cfg;
};

struct qfc_density {
  qfc::DensityMatrix rho;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_error_key;
thread_local int g_error_line = 0;

qfc_status fail(qfc_status s, const char* what) {
  g_error = what;
  g_error_key.clear();
  g_error_line = 0;
  return s;
}

// Runs f, translating exceptions into status codes.
template <class F>
qfc_status guarded(F&& f) {
  try {
    f();
    return QFC_OK;
  } catch (const qfc::ConfigError& e) {
    qfc_status s = fail(QFC_ERR_CONFIG, e.what());
    g_error_key = e.key();
    g_error_line = e.line();
    return s;
  } catch (const qfc::InvalidArgument& e) {
    return fail(QFC_ERR_INVALID_ARGUMENT, e.what());
  } catch (const qfc::NumericalError& e) {
    return fail(QFC_ERR_NUMERICAL, e.what());
  } catch (const qfc::IoError& e) {
    return fail(QFC_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(QFC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(QFC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(QFC_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw qfc::InvalidArgument(what);
}

qfc::ComplexMatrix read_matrix(int dim, const double* re, const double* im) {
  qfc::check_dim(dim);
  require(re != nullptr, "real part must not be NULL");
  qfc::ComplexMatrix m(dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) m(r, c) = {re[r * dim + c], im ? im[r * dim + c] : 0.0};
  return m;
}

}  // namespace

extern "C" {

const char* qfc_version(void) {
  static const std::string v = qfc::library_version();
  return v.c_str();
}

const char* qfc_last_error(void) { return g_error.c_str(); }
const char* qfc_last_error_key(void) { return g_error_key.c_str(); }
int qfc_last_error_line(void) { return g_error_line; }

const char* qfc_status_name(qfc_status s) {
  switch (s) {
    case QFC_OK:
      return "ok";
    case QFC_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case QFC_ERR_NUMERICAL:
      return "numerical error";
    case QFC_ERR_CONFIG:
      return "config error";
    case QFC_ERR_IO:
      return "i/o error";
    case QFC_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

qfc_status qfc_config_load(const char* experiment, const char* path, qfc_config** out) {
  return guarded([&] {
    require(experiment && path && out, "qfc_config_load: NULL argument");
    *out = nullptr;
    auto* c = new qfc_config{qfc::load_config(qfc::parse_experiment(experiment), path)};
    *out = c;
  });
}

qfc_status qfc_config_parse(const char* experiment, const char* text, qfc_config** out) {
  return guarded([&] {
    require(experiment && text && out, "qfc_config_parse: NULL argument");
    *out = nullptr;
    auto* c = new qfc_config{qfc::parse_config(qfc::parse_experiment(experiment), text)};
    *out = c;
  });
}

qfc_status qfc_config_set_seed(qfc_config* cfg, uint64_t seed) {
  return guarded([&] {
    require(cfg != nullptr, "qfc_config_set_seed: NULL config");
    cfg->cfg.seed = seed;
  });
}

const char* qfc_config_output_path(const qfc_config* cfg) { return cfg ? cfg->cfg.output_path.c_str() : ""; }

qfc_status qfc_config_render(const qfc_config* cfg, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    require(cfg != nullptr, "qfc_config_render: NULL config");
    const std::string text = qfc::render_config(cfg->cfg);
    if (needed) *needed = text.size();
    if (buf && cap > 0) {
      const size_t n = std::min(cap - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
  });
}

void qfc_config_free(qfc_config* cfg) { delete cfg; }

qfc_status qfc_run_experiment(const qfc_config* cfg, const char* out_dir, qfc_run_info* info) {
  return guarded([&] {
    require(cfg && out_dir, "qfc_run_experiment: NULL argument");
    const qfc::RunReport r = qfc::run_experiment(cfg->cfg, out_dir);
    if (info) {
      info->wall_time_s = r.wall_time_s;
      info->n_files = static_cast<int>(r.files.size());
    }
  });
}

qfc_status qfc_density_create(int dim, const double* re, const double* im, qfc_density** out) {
  return guarded([&] {
    require(out != nullptr, "qfc_density_create: NULL output");
    *out = nullptr;
    *out = new qfc_density{qfc::DensityMatrix::from_matrix(read_matrix(dim, re, im))};
  });
}

int qfc_density_dim(const qfc_density* rho) { return rho ? rho->rho.dim() : 0; }

qfc_status qfc_density_eigenvalues(const qfc_density* rho, double* values) {
  return guarded([&] {
    require(rho && values, "qfc_density_eigenvalues: NULL argument");
    const auto ev = rho->rho.eigen().eigenvalues();
    std::copy(ev.begin(), ev.end(), values);
  });
}

qfc_status qfc_density_entropies(const qfc_density* rho, double* von_neumann, double* linear, double* delta) {
  return guarded([&] {
    require(rho != nullptr, "qfc_density_entropies: NULL density");
    const qfc::EntropyReport e = qfc::entropies(rho->rho);
    if (von_neumann) *von_neumann = e.von_neumann;
    if (linear) *linear = e.linear;
    if (delta) *delta = e.delta;
  });
}

qfc_status qfc_density_entropy_rate(const qfc_density* rho, const double* re, const double* im, double k,
                                    double* rate) {
  return guarded([&] {
    require(rho && rate, "qfc_density_entropy_rate: NULL argument");
    const qfc::ComplexMatrix x = read_matrix(rho->rho.dim(), re, im);
    require(x.is_hermitian(1e-12 * std::max(1.0, x.max_abs())), "observable must be Hermitian");
    require(k >= 0.0, "k must be >= 0");
    *rate = qfc::exact_mean_entropy_rate(rho->rho, x, k);
  });
}

void qfc_density_free(qfc_density* rho) { delete rho; }

qfc_status qfc_steady_mean_success(double k, double beta, double eps, double* out) {
  return guarded([&] {
    require(out != nullptr, "NULL output");
    *out = qfc::mean_success(qfc::p_ss_fb(k, beta, eps, qfc::GridSpec{2}));
  });
}

qfc_status qfc_steady_nofb_density(double k, double beta, double z, double* out) {
  return guarded([&] {
    require(out != nullptr, "NULL output");
    *out = qfc::p_ss_nofb(k, beta, qfc::GridSpec{2})(z);
  });
}

qfc_status qfc_unbiased_qubit_success(double k, double beta, double* out) {
  return guarded([&] {
    require(out != nullptr, "NULL output");
    *out = qfc::unbiased_qubit_success(k, beta);
  });
}

qfc_status qfc_rule_of_thumb(double k, double beta, double j_coupling, double* out, int* valid) {
  return guarded([&] {
    require(out != nullptr, "NULL output");
    const qfc::AnalyticPerformance a = qfc::analytic_performance(k, beta, j_coupling, 2);
    *out = a.rule_of_thumb;
    if (valid) *valid = a.rule_of_thumb_valid ? 1 : 0;
  });
}

qfc_status qfc_closed_loop(const qfc_feedback* fb, double k, double beta, double dt, uint64_t seed, double t_final,
                           int n_traj, qfc_closed_loop_result* out) {
  return guarded([&] {
    require(fb && out, "qfc_closed_loop: NULL argument");
    require(fb->mode == QFC_COMMUTING || fb->mode == QFC_UNBIASED, "unknown feedback mode");
    qfc::FeedbackConfig cfg;
    cfg.mode = fb->mode == QFC_COMMUTING ? qfc::FeedbackMode::commuting : qfc::FeedbackMode::unbiased;
    cfg.mu = fb->mu > 0.0 ? fb->mu : std::numeric_limits<double>::infinity();
    cfg.threshold_eps = fb->threshold_eps;
    cfg.measurement_during_rotation = fb->measurement_during_rotation != 0;
    qfc::SmeParams p;
    p.k = k;
    p.beta = beta;
    p.dt = dt;
    p.seed = seed;
    const qfc::ClosedLoopResult r = qfc::run_closed_loop(cfg, p, t_final, n_traj);
    out->mean_success = r.mean_success;
    out->stderr_success = r.stderr_success;
    out->trigger_rate = r.trigger_rate;
    out->psd_violations = r.psd_violations;
  });
}

}  // extern "C"
