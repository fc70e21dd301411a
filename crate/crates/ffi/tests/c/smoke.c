#include <math.h>
#include <stdio.h>
#include <string.h>

#include "rnna.h"

#define CHECK(call)                                                          \
    do {                                                                     \
        RnnaStatus s_ = (call);                                              \
        if (s_ != RNNA_STATUS_OK) {                                          \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, rnna_last_error()); \
            return 1;                                                        \
        }                                                                    \
    } while (0)

int main(void) {
    RnnaChannel *ch = NULL;
    CHECK(rnna_channel_new(10000, 10000.0, &ch));

    double thr[3], sep;
    CHECK(rnna_optimum_thresholds(ch, thr, &sep));
    if (!(thr[0] < thr[1] && thr[1] < thr[2]) || !(sep > 0.0 && sep < 0.05)) {
        fprintf(stderr, "bad thresholds\n");
        return 1;
    }

    double widths[3] = {0.1, 0.1, 0.1}, b[6], trace[10];
    CHECK(rnna_soft_boundaries(thr, widths, b));
    CHECK(rnna_dde_run(ch, thr, widths, 5, 69, 0.5, 10, trace));

    RnnaCode *code = NULL;
    CHECK(rnna_code_peg(1008, 3, 6, 0, &code));
    size_t n, k;
    CHECK(rnna_code_dims(code, &n, &k, NULL));

    unsigned char info[1008], cw[1008], bits[1008], sym[504];
    double v[504], llr[1008];
    signed char ill[1008];
    for (size_t i = 0; i < k; i++) info[i] = (unsigned char)((i * 7 + 3) % 5 < 2);
    CHECK(rnna_code_encode(code, info, k, cw, n));
    for (size_t c = 0; c < n / 2; c++) {
        /* Gray map: (msb, lsb) 11 -> 0, 10 -> 1, 00 -> 2, 01 -> 3 */
        unsigned char m = cw[2 * c], l = cw[2 * c + 1];
        sym[c] = m ? (l ? 0 : 1) : (l ? 3 : 2);
    }
    CHECK(rnna_channel_sample(ch, sym, n / 2, 42, v));
    CHECK(rnna_integer_llrs(b, v, n / 2, ill));
    for (size_t i = 0; i < n; i++) llr[i] = ill[i];
    size_t iters;
    bool ok;
    CHECK(rnna_code_decode(code, llr, n, 0.5, 10, bits, &iters, &ok));
    size_t errors = 0;
    for (size_t i = 0; i < n; i++) errors += bits[i] != cw[i];

    /* error path: NULL handle */
    if (rnna_channel_moments(NULL, thr, thr) != RNNA_STATUS_NULL_POINTER ||
        strstr(rnna_last_error(), "NULL") == NULL) {
        fprintf(stderr, "expected NULL-pointer status\n");
        return 1;
    }

    printf("version %s sep %.4e pe10 %.3e decode errors %zu iters %zu\n",
           rnna_version(), sep, trace[9], errors, iters);
    rnna_code_free(code);
    rnna_channel_free(ch);
    return errors == 0 ? 0 : 2;
}
