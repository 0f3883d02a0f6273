#include <stdio.h>
#include <string.h>

#include "morphsynth.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        MsStatus s_ = (call);                                              \
        if (s_ != MS_STATUS_OK) {                                          \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_,              \
                    ms_last_error_message());                              \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    uint64_t mu = 0;
    CHECK(ms_multiset_coefficient(4, 3, &mu));

    MsEstimate *a = NULL, *b = NULL;
    CHECK(ms_estimate_parse("(2,1,0,0)", &a));
    CHECK(ms_estimate_parse("(3,0,0,0)", &b));
    uint64_t minus = 0, plus = 0;
    CHECK(ms_estimate_proximity(a, b, &minus, &plus));
    MsDominance d;
    CHECK(ms_estimate_dominates(b, a, &d));
    ms_estimate_free(a);
    ms_estimate_free(b);

    MsModel *m = NULL;
    CHECK(ms_model_builtin(&m));
    uint64_t size = 0;
    CHECK(ms_model_design_space_size(m, &size));
    double budget = 45;
    char *plan = NULL;
    CHECK(ms_improve_json(m, NULL, &budget, &plan));
    int has_plan = strstr(plan, "\"y34\"") != NULL;
    ms_string_free(plan);
    ms_model_free(m);

    MsStatus bad = ms_estimate_parse("(1,x)", &a);
    printf("%llu %llu %llu %d %llu %d %d\n", (unsigned long long)mu, (unsigned long long)minus,
           (unsigned long long)plus, (int)d, (unsigned long long)size, has_plan,
           (int)bad);
    return 0;
}
