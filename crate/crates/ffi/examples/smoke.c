/* Build after `cargo build -p sercomp-ffi`:
 *   cc crates/ffi/examples/smoke.c -Icrates/ffi/include -Ltarget/debug -lsercomp_ffi -o smoke
 *   LD_LIBRARY_PATH=target/debug ./smoke
 */
#include <stdio.h>

#include "sercomp.h"

int main(void) {
    double f_res = 0.0;
    if (sercomp_ssr_frequency(0.25, 60.0, &f_res) != SERCOMP_STATUS_OK) {
        return 1;
    }
    printf("sercomp %s: f_res = %.3f Hz\n", sercomp_version(), f_res);

    const char *json = "{\"sim\": {\"dt_s\": 1e-4, \"duration_s\": 0.1},"
                       " \"events\": [{\"t_s\": 0.02, \"target_s_va\": 480e6, \"target_pf\": 0.8}]}";
    SercompScenario *scenario = NULL;
    SercompResult *result = NULL;
    char err[256];
    if (sercomp_scenario_from_json(json, &scenario) != SERCOMP_STATUS_OK ||
        sercomp_scenario_run(scenario, &result) != SERCOMP_STATUS_OK) {
        sercomp_last_error_message(err, sizeof err);
        fprintf(stderr, "error: %s\n", err);
        sercomp_scenario_free(scenario);
        return 1;
    }

    const double *p = NULL;
    size_t n = 0;
    sercomp_result_channel(result, "p_delivered_w", &p, &n);
    printf("%zu samples, final P = %.4g W\n", n, p[n - 1]);

    sercomp_result_free(result);
    sercomp_scenario_free(scenario);
    return 0;
}
