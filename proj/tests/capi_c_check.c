/* Compiled as C to keep the public header C-clean. */
#include "speedmeter/speedmeter.h"

int sm_c_check_rates(double* gamma1) {
  sm_config* cfg = NULL;
  sm_rates rates;
  if (sm_config_new(&cfg) != SM_OK) return -1;
  sm_status st = sm_derive_rates(cfg, &rates);
  sm_config_free(cfg);
  if (st != SM_OK) return (int)st;
  *gamma1 = rates.gamma1;
  return 0;
}
