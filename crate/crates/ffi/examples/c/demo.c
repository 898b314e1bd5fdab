/* Runs ME-RISC and no-RIS on a configuration and prints the mean worst-user throughput. */
#include <stdio.h>
#include <stdlib.h>

#include "merisc.h"

static int check(MeriscStatus s, const char *what) {
    if (s != MERISC_STATUS_OK) {
        const char *msg = merisc_last_error();
        fprintf(stderr, "%s failed (%d): %s\n", what, (int)s, msg ? msg : "");
        return 1;
    }
    return 0;
}

int main(int argc, char **argv) {
    if (argc < 2) {
        fprintf(stderr, "usage: %s config.toml [seed]\n", argv[0]);
        return 2;
    }
    uint64_t seed = argc > 2 ? strtoull(argv[2], NULL, 10) : 1;
    MeriscSetup *setup = NULL;
    if (check(merisc_setup_load(argv[1], seed, &setup), "load")) return 1;

    MeriscVariant variants[] = {MERISC_VARIANT_ME_RISC, MERISC_VARIANT_NO_RIS};
    const char *names[] = {"me_risc", "no_ris"};
    for (int i = 0; i < 2; i++) {
        MeriscRun *run = NULL;
        if (check(merisc_run(setup, variants[i], seed, &run), "run")) {
            merisc_setup_free(setup);
            return 1;
        }
        printf("%s %zu %.6f\n", names[i], merisc_run_num_steps(run), merisc_run_mean_worst(run));
        merisc_run_free(run);
    }
    merisc_setup_free(setup);
    return 0;
}
