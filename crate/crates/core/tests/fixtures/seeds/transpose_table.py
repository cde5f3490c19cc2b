def transpose_table(rows, fill=None):
    width = 0
    for row in rows:
        if len(row) > width:
            width = len(row)
    columns = []
    for index in range(width):
        column = [row[index] if index < len(row) else fill for row in rows]
        columns.append(column)
    return columns
