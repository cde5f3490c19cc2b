def nested_class_factory(name, fields):
    defaults = {field: None for field in fields}
    class Record:
        __slots__ = tuple(fields)
        def __init__(self, **values):
            for field in fields:
                setattr(self, field, values.get(field, defaults[field]))
    Record.__name__ = name
    return Record
