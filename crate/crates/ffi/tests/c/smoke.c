#include <stdio.h>
#include <string.h>

#include "anb.h"

int main(void) {
    AnbGraph *g = NULL;
    if (anb_graph_generate("star", 5, 0, &g) != ANB_STATUS_OK) {
        fprintf(stderr, "generate: %s\n", anb_last_error_message());
        return 1;
    }
    AnbRunOptions opts;
    memset(&opts, 0, sizeof opts);
    opts.algorithm = ANB_ALGORITHM_ANB;
    opts.verify = true;

    AnbResult *r = NULL;
    if (anb_run(g, &opts, &r) != ANB_STATUS_OK) {
        fprintf(stderr, "run: %s\n", anb_last_error_message());
        return 1;
    }
    AnbMetrics m;
    anb_result_metrics(r, &m);
    char buf[32];
    size_t needed = 0;
    if (anb_result_final_count(r, 4, buf, sizeof buf, &needed) != ANB_STATUS_OK) {
        return 1;
    }
    printf("n=%llu correct=%d t_reduction=%llu t_total=%llu final=%s\n", (unsigned long long)m.n,
           (int)m.correct, (unsigned long long)m.t_reduction, (unsigned long long)m.t_total, buf);

    AnbGraph *bad = NULL;
    AnbStatus s = anb_graph_generate("ring", 2, 0, &bad);
    printf("ring2 status=%d\n", (int)s);

    anb_result_free(r);
    anb_graph_free(g);
    return 0;
}
