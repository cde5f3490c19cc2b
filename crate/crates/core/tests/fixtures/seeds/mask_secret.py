def mask_secret(value, visible=4, mask_char="*"):
    text = str(value)
    if len(text) <= visible:
        return mask_char * len(text)
    hidden = len(text) - visible
    masked = mask_char * hidden + text[-visible:]
    return masked
