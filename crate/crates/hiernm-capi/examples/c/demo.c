/* Minimal consumer of the hiernm C ABI: evaluate G(t), the NM measure, and
 * the memoryless threshold. Build (from the workspace root, after
 * `cargo build -p hiernm-capi`):
 *
 *   cc crates/hiernm-capi/examples/c/demo.c \
 *      -Icrates/hiernm-capi/include \
 *      -Ltarget/debug -lhiernm_capi -lm -lpthread -ldl -o demo
 */
#include <math.h>
#include <stdio.h>

#include "hiernm.h"

int main(void) {
  HiernmParams *params = NULL;
  HiernmStatus status = hiernm_params_new(0.3, 5.0, 1.0, &params);
  if (status != HIERNM_STATUS_OK) {
    fprintf(stderr, "params: %s\n", hiernm_status_message(status));
    return 1;
  }

  HiernmPropagator *prop = NULL;
  status = hiernm_propagator_new(params, &prop);
  if (status != HIERNM_STATUS_OK) {
    fprintf(stderr, "propagator: %s\n", hiernm_status_message(status));
    return 1;
  }
  for (int i = 0; i <= 4; i++) {
    double g = 0.0;
    hiernm_propagator_eval(prop, 2.5 * i, &g);
    printf("G(%.1f) = %.12f\n", 2.5 * i, g);
  }

  double nm = 0.0;
  int markovian = 0;
  hiernm_nm(params, 0.0, &nm, &markovian);
  printf("NM = %.6e (%s)\n", nm, markovian ? "markovian" : "non-markovian");

  double kappa_t = 0.0;
  hiernm_threshold_kappa(INFINITY, 1.0, 0.0, &kappa_t);
  printf("memoryless threshold = %.6f\n", kappa_t);

  hiernm_propagator_free(prop);
  hiernm_params_free(params);
  return 0;
}
