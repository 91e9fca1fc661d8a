#include <math.h>
#include <stdio.h>
#include "dschan.h"

int main(void) {
    DschanConfig *cfg = dschan_config_full_scale();
    if (dschan_config_set_antennas(cfg, 4) != DSCHAN_STATUS_OK) return 1;
    if (dschan_config_set_antennas(cfg, 0) != DSCHAN_STATUS_INVALID_PARAMETER) return 2;
    if (dschan_last_error_message() == NULL) return 3;

    DschanTrialResult r;
    if (dschan_run_trial(cfg, 5, &r) != DSCHAN_STATUS_OK) return 4;
    if (!(r.proposed_nmse_db < r.ls_nmse_db) || !r.has_smoothed) return 5;
    dschan_config_free(cfg);

    size_t passed = 0, total = 0;
    if (dschan_verify(&passed, &total) != DSCHAN_STATUS_OK || passed != total) return 6;
    printf("ok %s %.2f\n", dschan_version(), r.proposed_nmse_db);
    return 0;
}
