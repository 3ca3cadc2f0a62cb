#include <tee_internal_api.h>

static uint8_t sdp_header_tmpl[4096];

static TEE_Result sdp_set_header(uint32_t types, TEE_Param params[TEE_NUM_PARAMS])
{
	uint8_t header[128];

	(void)types;
	TEE_MemMove(header, sdp_header_tmpl, params[1].value.a);
	return TEE_SUCCESS;
}
