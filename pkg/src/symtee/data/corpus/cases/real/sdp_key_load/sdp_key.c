#include <tee_internal_api.h>

#define SDP_KEY_MAX 64

static TEE_Result sdp_load_key(uint32_t types, TEE_Param params[TEE_NUM_PARAMS])
{
	uint8_t key[SDP_KEY_MAX];
	TEE_ObjectHandle obj = TEE_HANDLE_NULL;
	TEE_Result res;

	(void)types;
	res = TEE_AllocateTransientObject(TEE_TYPE_AES, 256, &obj);
	if (res != TEE_SUCCESS)
		return res;

	TEE_MemMove(key, params[0].memref.buffer, params[0].memref.size);

	TEE_FreeTransientObject(obj);
	return TEE_SUCCESS;
}
