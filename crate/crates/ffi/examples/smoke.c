#include <assert.h>
#include <math.h>
#include <stdio.h>
#include <string.h>
#include "chainprobe.h"

int main(void) {
  double tau = 0.0;
  assert(chainprobe_bayes_threshold(0.8, 0.2, &tau) == ChainprobeStatus_Ok);
  assert(fabs(tau - 4.0) < 1e-12);

  double p_a = 0.0, p_u = 0.0;
  assert(chainprobe_accountability_gaussian(sqrt(30.0), 1.0, &p_a, &p_u) ==
         ChainprobeStatus_Ok);
  assert(fabs(p_a - 0.9969150503397279) < 1e-12);
  assert(fabs(p_u - 0.0030849496602720836) < 1e-12);

  uint64_t threshold = 0;
  double achieved = 0.0;
  assert(chainprobe_np_binomial_threshold(0.9, 0.05, 20, &threshold,
                                          &achieved) == ChainprobeStatus_Ok);
  assert(threshold == 16);

  ChainprobeArocCurve *curve = NULL;
  assert(chainprobe_aroc_curve_new(2.0, 200, &curve) == ChainprobeStatus_Ok);
  double auc = 0.0;
  assert(chainprobe_aroc_curve_auc(curve, &auc) == ChainprobeStatus_Ok);
  assert(fabs(auc - 0.9213) < 0.002);
  uint8_t pass = 0;
  assert(chainprobe_aroc_curve_properties_pass(curve, &pass) ==
         ChainprobeStatus_Ok);
  assert(pass == 1);
  chainprobe_aroc_curve_free(curve);

  /* error path + message retrieval */
  ChainprobeStatus bad = chainprobe_accountability_gaussian(-1.0, 1.0, &p_a, &p_u);
  assert(bad == ChainprobeStatus_InvalidArgument);
  char message[256];
  size_t len = chainprobe_last_error_message(message, sizeof message);
  assert(len > 0 && strstr(message, "d") != NULL);

  printf("C ABI smoke test passed (version %s)\n", chainprobe_version());
  return 0;
}
