#include <stdio.h>
#include <string.h>
#include "tradecurrency.h"

#define CHECK(x) do { if ((x) != TC_STATUS_OK) { fprintf(stderr, "%s: %s\n", #x, tc_last_error()); return 1; } } while (0)

int main(void) {
    const char *codes[] = {"CN", "FR", "KE", "US"};
    double flows[16] = {
        0, 20, 4, 30,
        15, 0, 0, 18,
        11, 0, 0, 0,
        25, 16, 0, 0,
    };
    TcMatrix *m = NULL;
    TcConfig *c = NULL;
    TcResult *r = NULL;
    CHECK(tc_matrix_from_dense(2019, codes, 4, flows, &m));
    CHECK(tc_config_from_toml("n_runs = 50\n[seed_groups]\nUSD = [\"US\"]\nEUR = [\"FR\"]\nBRI = [\"CN\"]\n", &c));
    CHECK(tc_run_ensemble(m, c, 1, &r));
    double f[3];
    CHECK(tc_result_mean_fractions(r, f, 3));
    unsigned char tcp[4];
    CHECK(tc_result_modal_tcp(r, tcp, 4));
    char *code = NULL;
    CHECK(tc_matrix_country_code(m, 3, &code));
    if (strcmp(code, "US") != 0 || tcp[3] != 0) return 2;
    tc_string_free(code);
    printf("%.6f %.6f %.6f\n", f[0], f[1], f[2]);
    if (tc_matrix_from_dense(2019, codes, 4, NULL, &m) != TC_STATUS_NULL_POINTER) return 3;
    tc_result_free(r);
    tc_config_free(c);
    tc_matrix_free(m);
    return 0;
}
