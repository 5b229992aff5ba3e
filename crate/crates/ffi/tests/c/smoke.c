#include <math.h>
#include <stdio.h>
#include <string.h>

#include "otr_bounds.h"

int main(void) {
    double values[53];
    for (int i = 0; i < 53; i++) values[i] = i;
    OtrArm control = {123, 11.94, 7.52 * 7.52};
    OtrArm treatment = {115, 10.73, 6.53 * 6.53};
    OtrTrial *trial = NULL;
    if (otr_trial_new(&control, &treatment, OTR_SPACE_KIND_FINITE, values, 53, 0, 0,
                      OTR_DIRECTION_LOWER_BETTER, &trial) != OTR_STATUS_OK) {
        fprintf(stderr, "trial: %s\n", otr_last_error_message());
        return 1;
    }
    OtrInterval b;
    if (otr_benefit_bounds_lp(trial, 0.0, &b) != OTR_STATUS_OK) return 2;
    OtrInterval ci;
    if (otr_ci_benefit_lp(trial, 0.05, OTR_MEAN_SE_STANDARD, &ci) != OTR_STATUS_OK) return 3;
    otr_trial_free(trial);
    printf("%.4f %.4f %.4f\n", b.lower, b.upper, ci.upper);
    if (fabs(b.upper - 6.43) > 0.05 || fabs(ci.upper - 12.25) > 0.15) return 4;

    double z;
    if (otr_normal_quantile(1.5, &z) != OTR_STATUS_DOMAIN_ERROR) return 5;
    if (otr_last_error_message() == NULL) return 6;

    char *report = NULL;
    const char *doc = "{\"outcome_space\":{\"type\":\"binary\"},\"direction\":\"higher_better\","
                      "\"arms\":{\"control\":{\"n\":50,\"mean\":0.3,\"variance\":0.21},"
                      "\"treatment\":{\"n\":50,\"mean\":0.5,\"variance\":0.25}}}";
    if (otr_run_json("benefit", doc, &report) != OTR_STATUS_OK) return 7;
    if (strstr(report, "\"exit_code\": 0") == NULL) return 8;
    otr_string_free(report);
    return 0;
}
