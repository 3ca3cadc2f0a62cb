#include <string.h>
#include <stdint.h>

struct request {
    uint32_t len;
    const uint8_t *data;
};

void handle_request(struct request *req)
{
    uint8_t tmp[128];

    memmove(tmp, req->data, req->len);
    tmp[0] ^= 1;
}
