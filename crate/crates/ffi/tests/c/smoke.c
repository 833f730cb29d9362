#include <stdio.h>
#include <stdlib.h>
#include "cohest.h"

int main(void) {
    CohestCost tb, imp;
    if (cohest_cost(COHEST_ALGORITHM_TEXTBOOK_PE, 10, 1.0 / 1024, 1e-30, NULL, &tb) != COHEST_STATUS_OK) return 1;
    if (cohest_cost(COHEST_ALGORITHM_IMPROVED_PE, 10, 1.0 / 1024, 1e-30, NULL, &imp) != COHEST_STATUS_OK) return 1;
    printf("%s %llu %llu\n", cohest_version(), (unsigned long long)tb.queries, (unsigned long long)imp.queries);

    if (cohest_cost(COHEST_ALGORITHM_IMPROVED_PE, 10, 2.0, 1e-30, NULL, &imp) != COHEST_STATUS_INVALID_INPUT) return 2;
    char *msg = cohest_last_error_message();
    if (msg == NULL) return 3;
    cohest_string_free(msg);

    CohestInstance *inst = NULL;
    CohestReport *rep = NULL;
    CohestOptions *opts = cohest_options_new();
    cohest_options_set_eta_rule(opts, COHEST_ETA_RULE_LINEAR);
    if (cohest_instance_generate(2, 0.3, 2, 7, COHEST_INSTANCE_KIND_UNITARY, &inst) != COHEST_STATUS_OK) return 4;
    if (cohest_simulate(COHEST_ALGORITHM_IMPROVED_PE, inst, 0.05, opts, &rep) != COHEST_STATUS_OK) return 5;
    size_t len = 0;
    cohest_report_success(rep, NULL, 0, &len);
    double *succ = (double *)malloc(len * sizeof(double));
    if (cohest_report_success(rep, succ, len, &len) != COHEST_STATUS_OK) return 6;
    for (size_t i = 0; i < len; i++) {
        if (succ[i] < 0.95) return 7;
    }
    free(succ);
    cohest_report_free(rep);
    cohest_instance_free(inst);
    cohest_options_free(opts);
    return 0;
}
