def sanitize_filename(name, replacement="_", max_length=255):
    forbidden = '<>:"/\\|?*'
    cleaned = "".join(replacement if ch in forbidden or ord(ch) < 32 else ch for ch in name)
    cleaned = cleaned.strip(" .")
    if not cleaned:
        cleaned = "unnamed"
    if len(cleaned) > max_length:
        stem, dot, ext = cleaned.rpartition(".")
        cleaned = stem[: max_length - len(ext) - 1] + dot + ext if dot else cleaned[:max_length]
    return cleaned
