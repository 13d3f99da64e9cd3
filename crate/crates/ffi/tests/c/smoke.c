#include <stdio.h>
#include "fockforge.h"

int main(void) {
    FfDevice *d = NULL;
    size_t boost[] = {0};
    if (ff_device_new(FF_DEVICE_KIND_BELL, 2, boost, 1, &d) != FF_STATUS_OK) {
        fprintf(stderr, "%s\n", ff_last_error());
        return 1;
    }
    FfProbability p;
    ff_device_success_probability(d, &p);
    printf("%lld/%lld\n", (long long)p.numerator, (long long)p.denominator);
    ff_device_free(d);

    FfScheme *s = NULL;
    FfStatus st = ff_scheme_compile("{", &s);
    printf("%d %s\n", (int)st, s == NULL ? "null" : "set");
    return 0;
}
