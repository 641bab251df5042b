/* Exercises the C interface from C. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "qfc/qfc.h"

static int failures = 0;

#define EXPECT(cond)                                                    \
  do {                                                                  \
    if (!(cond)) {                                                      \
      fprintf(stderr, "%s:%d: expectation failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                       \
    }                                                                   \
  } while (0)

static void test_errors(void) {
  qfc_config* cfg = NULL;
  EXPECT(qfc_config_parse("fig1a", "seed = 1\nwhatever = 2\n", &cfg) == QFC_ERR_CONFIG);
  EXPECT(cfg == NULL);
  EXPECT(strcmp(qfc_last_error_key(), "whatever") == 0);
  EXPECT(qfc_last_error_line() == 2);
  EXPECT(strstr(qfc_last_error(), "unknown key") != NULL);

  EXPECT(qfc_config_parse("nope", "", &cfg) == QFC_ERR_INVALID_ARGUMENT);
  EXPECT(qfc_config_parse(NULL, "", &cfg) == QFC_ERR_INVALID_ARGUMENT);
  EXPECT(qfc_config_load("fig1a", "/nonexistent/qfc.cfg", &cfg) == QFC_ERR_IO);
  EXPECT(strcmp(qfc_status_name(QFC_ERR_NUMERICAL), "numerical error") == 0);
  EXPECT(strlen(qfc_version()) > 0);
}

static void test_config(void) {
  qfc_config* cfg = NULL;
  char buf[2048];
  size_t need = 0;
  EXPECT(qfc_config_parse("mub_audit", "dims = 2\noutput_path = somewhere\n", &cfg) == QFC_OK);
  EXPECT(strcmp(qfc_config_output_path(cfg), "somewhere") == 0);
  EXPECT(qfc_config_set_seed(cfg, 77) == QFC_OK);
  EXPECT(qfc_config_render(cfg, buf, sizeof buf, &need) == QFC_OK);
  EXPECT(need == strlen(buf));
  EXPECT(strstr(buf, "seed = 77") != NULL);
  EXPECT(qfc_config_render(cfg, buf, 5, &need) == QFC_OK);
  EXPECT(strlen(buf) == 4);
  qfc_config_free(cfg);
  qfc_config_free(NULL);
}

static void test_density(void) {
  const double re[4] = {0.99, 0.0, 0.0, 0.01};
  const double sx[4] = {0.0, 1.0, 1.0, 0.0};
  const double bad[4] = {0.7, 0.0, 0.0, 0.7};
  qfc_density* rho = NULL;
  double ev[2], s, l, d, rate;
  EXPECT(qfc_density_create(2, bad, NULL, &rho) == QFC_ERR_INVALID_ARGUMENT);
  EXPECT(rho == NULL);
  EXPECT(qfc_density_create(9, re, NULL, &rho) == QFC_ERR_INVALID_ARGUMENT);
  EXPECT(qfc_density_create(2, re, NULL, &rho) == QFC_OK);
  EXPECT(qfc_density_dim(rho) == 2);
  EXPECT(qfc_density_eigenvalues(rho, ev) == QFC_OK);
  EXPECT(fabs(ev[0] - 0.99) < 1e-14 && fabs(ev[1] - 0.01) < 1e-14);
  EXPECT(qfc_density_entropies(rho, &s, &l, &d) == QFC_OK);
  EXPECT(fabs(l - 0.0198) < 1e-14);
  EXPECT(fabs(d - 0.01) < 1e-14);
  /* sigma_x is unbiased w.r.t. a diagonal qubit: L' = -8kL */
  EXPECT(qfc_density_entropy_rate(rho, sx, NULL, 2.0, &rate) == QFC_OK);
  EXPECT(fabs(rate + 16.0 * l) < 1e-12);
  EXPECT(qfc_density_entropy_rate(rho, sx, NULL, -1.0, &rate) == QFC_ERR_INVALID_ARGUMENT);
  qfc_density_free(rho);
}

static void test_analytics(void) {
  double v;
  int valid = -1;
  EXPECT(qfc_unbiased_qubit_success(1.0, 1.0, &v) == QFC_OK);
  EXPECT(fabs(v - 0.5 * (1.0 + sqrt(0.5))) < 1e-15);
  EXPECT(qfc_rule_of_thumb(10.0, 1.0, 1.0, &v, &valid) == QFC_OK);
  EXPECT(fabs(v - 0.975) < 1e-15 && valid == 1);
  EXPECT(qfc_rule_of_thumb(0.1, 1.0, 1.0, &v, &valid) == QFC_OK);
  EXPECT(valid == 0);
  EXPECT(qfc_steady_mean_success(1.0, 1.0, 0.0, &v) == QFC_OK);
  EXPECT(v > 0.79 && v < 0.8);
  EXPECT(qfc_steady_mean_success(1.0, 1.0, 1.5, &v) == QFC_ERR_INVALID_ARGUMENT);
  EXPECT(qfc_steady_nofb_density(2.0, 1.0, 0.3, &v) == QFC_OK);
  EXPECT(v > 0.0);
  EXPECT(qfc_steady_nofb_density(2.0, 0.0, 0.3, &v) == QFC_ERR_INVALID_ARGUMENT);
}

static void test_closed_loop(void) {
  qfc_feedback fb = {QFC_UNBIASED, 0.0, 0.0, 0};
  qfc_closed_loop_result a, b;
  EXPECT(qfc_closed_loop(&fb, 2.0, 1.0, 1e-4, 3, 0.2, 3, &a) == QFC_OK);
  EXPECT(qfc_closed_loop(&fb, 2.0, 1.0, 1e-4, 3, 0.2, 3, &b) == QFC_OK);
  EXPECT(a.mean_success == b.mean_success);
  EXPECT(a.mean_success > 0.5 && a.mean_success <= 1.0);
  EXPECT(a.psd_violations == 0);
  fb.mode = (qfc_feedback_mode)7;
  EXPECT(qfc_closed_loop(&fb, 2.0, 1.0, 1e-4, 3, 0.2, 3, &a) == QFC_ERR_INVALID_ARGUMENT);
  fb.mode = QFC_COMMUTING;
  EXPECT(qfc_closed_loop(&fb, 2.0, 1.0, 0.5, 3, 0.2, 3, &a) == QFC_ERR_INVALID_ARGUMENT);
}

int main(void) {
  test_errors();
  test_config();
  test_density();
  test_analytics();
  test_closed_loop();
  if (failures) {
    fprintf(stderr, "%d failure(s)\n", failures);
    return 1;
  }
  puts("C API: all checks passed");
  return 0;
}
