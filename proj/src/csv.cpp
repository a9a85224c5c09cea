#include "ebm/csv.hpp"

#include <istream>

#include "ebm/error.hpp"

namespace ebm {

CsvReader::CsvReader(std::istream & in) : m_in(in) {}

bool CsvReader::next(std::vector<std::string> & fields) {
   fields.clear();

   if(m_first) {
      m_first = false;
      if(m_in.peek() == 0xEF) {
         char bom[3];
         m_in.read(bom, 3);
      }
   }

   std::string field;
   bool quoted = false;
   bool anyContent = false;
   m_recordLine = m_line;

   int c;
   while((c = m_in.get()) != std::char_traits<char>::eof()) {
      const char ch = static_cast<char>(c);
      if(quoted) {
         if(ch == '"') {
            if(m_in.peek() == '"') {
               m_in.get();
               field.push_back('"');
            } else {
               quoted = false;
            }
         } else {
            if(ch == '\n') {
               ++m_line;
            }
            field.push_back(ch);
         }
         continue;
      }

      if(ch == '"') {
         quoted = true;
         anyContent = true;
      } else if(ch == ',') {
         fields.push_back(std::move(field));
         field.clear();
         anyContent = true;
      } else if(ch == '\r' || ch == '\n') {
         if(ch == '\r' && m_in.peek() == '\n') {
            m_in.get();
         }
         ++m_line;
         if(!anyContent && field.empty()) {
            // blank line
            m_recordLine = m_line;
            continue;
         }
         fields.push_back(std::move(field));
         return true;
      } else {
         field.push_back(ch);
         anyContent = true;
      }
   }

   if(quoted) {
      throw DataError("unterminated quoted field starting on line " + std::to_string(m_recordLine));
   }
   if(!anyContent && field.empty()) {
      return false;
   }
   fields.push_back(std::move(field));
   return true;
}

std::string csv_escape(std::string_view field) {
   const bool needsQuotes = field.find_first_of(",\"\r\n") != std::string_view::npos ||
      (!field.empty() && (field.front() == ' ' || field.back() == ' '));
   if(!needsQuotes) {
      return std::string(field);
   }
   std::string out;
   out.reserve(field.size() + 2);
   out.push_back('"');
   for(const char ch : field) {
      if(ch == '"') {
         out.push_back('"');
      }
      out.push_back(ch);
   }
   out.push_back('"');
   return out;
}

std::string csv_join(const std::vector<std::string> & fields) {
   std::string line;
   for(std::size_t i = 0; i < fields.size(); ++i) {
      if(i != 0) {
         line.push_back(',');
      }
      line += csv_escape(fields[i]);
   }
   return line;
}

} // namespace ebm
